"""Logic puzzles solved by translating them into answer set programs."""

__version__ = "0.1.0"
