"""Chat-completion client with record/replay fixtures and exact cost accounting.

Fixtures are JSON Lines, one record per call::

    {"hash": <sha256 of prompt>, "model": ..., "response": ..., "input_tokens": n, "output_tokens": m, "finish_reason": ...}

Credentials come only from the environment: ``LOGOT_API_KEY`` (required for
live calls) and ``LOGOT_BASE_URL`` (overrides the configured endpoint).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional

import httpx

__all__ = [
    "MODES",
    "LlmConfig",
    "Usage",
    "Completion",
    "LlmError",
    "FixtureMissError",
    "prompt_hash",
    "format_cost",
    "FixtureStore",
    "llm_complete",
]

MODES = ("live", "record", "replay")
API_KEY_ENV = "LOGOT_API_KEY"
BASE_URL_ENV = "LOGOT_BASE_URL"


class LlmError(RuntimeError):
    pass


class FixtureMissError(LlmError):
    def __init__(self, prompt_hash: str, model: str):
        super().__init__(f"no fixture for prompt {prompt_hash} (model {model})")
        self.prompt_hash = prompt_hash
        self.model = model


def _price(x) -> Fraction:
    # go through str so that 0.005 means five thousandths, not the nearest double
    return x if isinstance(x, Fraction) else Fraction(str(x))


def format_cost(x: Fraction) -> str:
    """Exact decimal rendering when one exists (``0.0125``), else ``p/q``."""
    x = Fraction(x)
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    s = format(Decimal(x.numerator) / Decimal(x.denominator), "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s if "." in s else s + ".0"


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o"
    temperature: float = 0.0
    max_tokens: int = 2048
    price_in: Fraction = Fraction(0)  # per 1k input tokens
    price_out: Fraction = Fraction(0)  # per 1k output tokens
    mode: str = "replay"
    fixtures: Optional[str] = None
    max_concurrency: int = 4
    timeout: float = 120.0

    def __post_init__(self):
        object.__setattr__(self, "price_in", _price(self.price_in))
        object.__setattr__(self, "price_out", _price(self.price_out))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.price_in < 0 or self.price_out < 0:
            raise ValueError("prices must be non-negative")
        if self.mode in ("replay", "record") and not self.fixtures:
            raise ValueError(f"{self.mode} mode needs a fixture file")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "LlmConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown llm settings: {', '.join(sorted(extra))}")
        return cls(**d)


@dataclass(frozen=True)
class Usage:
    input_tokens: int = 0
    output_tokens: int = 0
    cost: Fraction = Fraction(0)

    @classmethod
    def priced(cls, input_tokens: int, output_tokens: int, cfg: LlmConfig) -> "Usage":
        cost = Fraction(input_tokens) * cfg.price_in / 1000 + Fraction(output_tokens) * cfg.price_out / 1000
        return cls(input_tokens, output_tokens, cost)

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.input_tokens + other.input_tokens, self.output_tokens + other.output_tokens, self.cost + other.cost)

    def to_dict(self) -> dict:
        return {"input_tokens": self.input_tokens, "output_tokens": self.output_tokens, "cost": format_cost(self.cost)}


@dataclass(frozen=True)
class Completion:
    text: str
    usage: Usage
    prompt_hash: str
    truncated: bool = False  # the model stopped at the token limit


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class FixtureStore:
    """Hash-keyed fixture file; appends are serialized through one lock."""

    def __init__(self, path: str):
        self.path = path
        self.records: dict = {}
        self.lock = threading.Lock()
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for n, line in enumerate(f, 1):
                    if not line.strip():
                        continue
                    try:
                        rec = json.loads(line)
                        key = (rec["hash"], rec["model"])
                    except (ValueError, KeyError) as e:
                        raise LlmError(f"{path}:{n}: bad fixture record ({e})") from None
                    self.records.setdefault(key, rec)

    def lookup(self, h: str, model: str) -> Optional[dict]:
        return self.records.get((h, model))

    def append(self, rec: dict):
        with self.lock:
            self.records.setdefault((rec["hash"], rec["model"]), rec)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


_stores: dict = {}
_stores_lock = threading.Lock()
_gates: dict = {}


def _store(path: str) -> FixtureStore:
    key = os.path.abspath(path)
    with _stores_lock:
        if key not in _stores:
            _stores[key] = FixtureStore(path)
        return _stores[key]


def _gate(cfg: LlmConfig) -> threading.BoundedSemaphore:
    key = (cfg.endpoint, cfg.model, cfg.max_concurrency)
    with _stores_lock:
        if key not in _gates:
            _gates[key] = threading.BoundedSemaphore(cfg.max_concurrency)
        return _gates[key]


def _post(prompt: str, cfg: LlmConfig, transport=None) -> dict:
    key = os.environ.get(API_KEY_ENV)
    if not key:
        raise LlmError(f"live calls need the {API_KEY_ENV} environment variable")
    base = os.environ.get(BASE_URL_ENV) or cfg.endpoint
    body = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    with _gate(cfg), httpx.Client(timeout=cfg.timeout, transport=transport) as client:
        try:
            resp = client.post(base.rstrip("/") + "/chat/completions", json=body, headers={"Authorization": f"Bearer {key}"})
        except httpx.HTTPError as e:
            raise LlmError(f"request failed: {e}") from e
    if resp.status_code != 200:
        raise LlmError(f"HTTP {resp.status_code}: {resp.text[:200]}")
    try:
        data = resp.json()
        choice = data["choices"][0]
        usage = data.get("usage", {})
        return {
            "response": choice["message"]["content"] or "",
            "input_tokens": int(usage.get("prompt_tokens", 0)),
            "output_tokens": int(usage.get("completion_tokens", 0)),
            "finish_reason": choice.get("finish_reason"),
        }
    except (ValueError, KeyError, IndexError, TypeError) as e:
        raise LlmError(f"malformed completion response: {e}") from None


def llm_complete(prompt: str, cfg: LlmConfig, transport=None) -> Completion:
    """One completion.  ``transport`` lets tests substitute an httpx mock transport."""
    h = prompt_hash(prompt)
    if cfg.mode == "replay":
        rec = _store(cfg.fixtures).lookup(h, cfg.model)
        if rec is None:
            raise FixtureMissError(h, cfg.model)
    else:
        rec = {"hash": h, "model": cfg.model, **_post(prompt, cfg, transport)}
        if cfg.mode == "record":
            _store(cfg.fixtures).append(rec)
    usage = Usage.priced(rec["input_tokens"], rec["output_tokens"], cfg)
    return Completion(rec["response"], usage, h, rec.get("finish_reason") == "length")
