"""Mask-scorer backends: the contract between prompts and any language model.

A backend receives a rendered prompt plus the candidate surface list per mask
role and must return one candidate-restricted, renormalized probability
vector per role.  How a model realizes soft tokens or scores multi-token
surfaces is the serving side's concern; the count and the surfaces travel in
the request so a server can honor them.

Two implementations ship: a deterministic table-driven mock (defaults plus
per-prompt-digest overrides) and an HTTP client with retries, backoff, and
strict response validation.  Error kinds are distinct classes so harnesses
can count backend failures separately from model mistakes.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from sensepath.scoring import MaskDistributions

WIRE_VERSION = 1
REMOTE_SUM_TOL = 1e-6


class BackendError(Exception):
    """Base class for scoring backend failures."""


class MissingRoleError(BackendError):
    pass


class BackendTimeoutError(BackendError):
    """Endpoint unreachable or too slow, after all configured retries."""


class ProtocolError(BackendError):
    """Response payload did not follow the wire protocol."""


class InvalidDistributionError(BackendError):
    """Response vector is not a probability distribution within tolerance."""


@dataclass(frozen=True)
class ScoreRequest:
    prompt_text: str
    mask_spans: dict[str, tuple[int, int]]
    candidate_sets: dict[str, tuple[str, ...]]
    soft_token_count: int = 0

    def __post_init__(self) -> None:
        if set(self.mask_spans) != set(self.candidate_sets):
            raise ValueError("mask_spans and candidate_sets must cover the same roles")
        for role, cands in self.candidate_sets.items():
            if not cands:
                raise ValueError(f"empty candidate set for role {role!r}")

    @classmethod
    def from_rendered(cls, rendered) -> "ScoreRequest":
        return cls(
            prompt_text=rendered.text,
            mask_spans=dict(rendered.mask_spans),
            candidate_sets=dict(rendered.candidate_sets),
            soft_token_count=rendered.soft_token_count,
        )

    def to_wire(self) -> dict:
        return {
            "v": WIRE_VERSION,
            "prompt": self.prompt_text,
            "mask_spans": {r: list(s) for r, s in self.mask_spans.items()},
            "candidates": {r: list(c) for r, c in self.candidate_sets.items()},
            "soft_tokens": self.soft_token_count,
        }


@dataclass(frozen=True)
class ScoreResponse:
    probs: dict[str, tuple[float, ...]]

    def distributions(self) -> MaskDistributions:
        return MaskDistributions(probs=dict(self.probs))


def prompt_digest(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


def validate_vector(vec, n_candidates: int, tol: float) -> tuple[float, ...]:
    """Check one response vector; returns it renormalized to sum exactly 1."""
    if not isinstance(vec, (list, tuple)) or len(vec) != n_candidates:
        raise ProtocolError(
            f"expected a vector of {n_candidates} floats, got {vec!r}"
        )
    try:
        floats = [float(p) for p in vec]
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"non-numeric probability in {vec!r}") from exc
    if any(math.isnan(p) or p < 0 for p in floats):
        raise InvalidDistributionError(f"negative or NaN probability in {floats!r}")
    total = math.fsum(floats)
    if abs(total - 1.0) > tol:
        raise InvalidDistributionError(
            f"distribution sums to {total!r}, outside 1 +/- {tol}"
        )
    return tuple(p / total for p in floats)


def validate_response(
    payload: dict, request: ScoreRequest, tol: float = REMOTE_SUM_TOL
) -> ScoreResponse:
    """Validate a wire response against the request's roles and candidates."""
    if not isinstance(payload, dict):
        raise ProtocolError(f"response payload is not an object: {payload!r}")
    if payload.get("v") != WIRE_VERSION:
        raise ProtocolError(f"unsupported wire version {payload.get('v')!r}")
    probs = payload.get("probs")
    if not isinstance(probs, dict):
        raise ProtocolError("response payload has no 'probs' object")
    out: dict[str, tuple[float, ...]] = {}
    for role, cands in request.candidate_sets.items():
        if role not in probs:
            raise MissingRoleError(f"response missing role {role!r}")
        out[role] = validate_vector(probs[role], len(cands), tol)
    return ScoreResponse(probs=out)


class MaskScorer(Protocol):
    def score(self, request: ScoreRequest) -> ScoreResponse: ...


# --- mock backend -----------------------------------------------------------

DISTRIBUTION_TABLE_TOL = 1e-9


@dataclass(frozen=True)
class MockTable:
    """Deterministic score source: per-role defaults plus digest overrides."""

    defaults: dict[str, tuple[float, ...]]
    overrides: dict[str, dict[str, tuple[float, ...]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for role, vec in self.defaults.items():
            validate_vector(vec, len(vec), tol=DISTRIBUTION_TABLE_TOL)
        for digest, roles in self.overrides.items():
            for role, vec in roles.items():
                validate_vector(vec, len(vec), tol=DISTRIBUTION_TABLE_TOL)

    def to_json(self) -> dict:
        return {
            "defaults": {r: list(v) for r, v in self.defaults.items()},
            "overrides": {
                d: {r: list(v) for r, v in roles.items()}
                for d, roles in self.overrides.items()
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MockTable":
        return cls(
            defaults={r: tuple(v) for r, v in doc.get("defaults", {}).items()},
            overrides={
                d: {r: tuple(v) for r, v in roles.items()}
                for d, roles in doc.get("overrides", {}).items()
            },
        )

    @classmethod
    def load(cls, path: str | Path) -> "MockTable":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class MockBackend:
    table: MockTable

    def score(self, request: ScoreRequest) -> ScoreResponse:
        override = self.table.overrides.get(prompt_digest(request.prompt_text), {})
        out: dict[str, tuple[float, ...]] = {}
        for role, cands in request.candidate_sets.items():
            vec = override.get(role, self.table.defaults.get(role))
            if vec is None:
                raise MissingRoleError(f"mock table has no distribution for role {role!r}")
            out[role] = validate_vector(vec, len(cands), tol=DISTRIBUTION_TABLE_TOL)
        return ScoreResponse(probs=out)


def mock_score(table: MockTable, request: ScoreRequest) -> ScoreResponse:
    return MockBackend(table).score(request)


# --- remote backend ---------------------------------------------------------


@dataclass
class RemoteBackend:
    """HTTP client for the versioned score endpoint.

    Timeouts and connection failures are retried ``retries`` times with
    exponential backoff plus jitter; protocol and distribution errors are
    never retried (the server would just repeat them).
    """

    endpoint: str
    timeout: float = 10.0
    retries: int = 2
    backoff_base: float = 0.25
    backoff_jitter: float = 0.1
    concurrency: int = 4
    session: requests.Session | None = None
    _rng: random.Random = field(default_factory=random.Random, repr=False)

    def _sleep_before_retry(self, attempt: int) -> None:
        delay = self.backoff_base * (2**attempt) + self._rng.uniform(0, self.backoff_jitter)
        time.sleep(delay)

    def score(self, request: ScoreRequest) -> ScoreResponse:
        url = self.endpoint.rstrip("/") + "/score"
        http = self.session or requests
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = http.post(url, json=request.to_wire(), timeout=self.timeout)
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_exc = exc
                if attempt < self.retries:
                    self._sleep_before_retry(attempt)
                continue
            if resp.status_code >= 500:
                last_exc = ProtocolError(f"server error {resp.status_code}")
                if attempt < self.retries:
                    self._sleep_before_retry(attempt)
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"unexpected status {resp.status_code}: {resp.text[:200]}")
            try:
                payload = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"response body is not JSON: {resp.text[:200]}") from exc
            return validate_response(payload, request)
        raise BackendTimeoutError(
            f"no response from {url} after {self.retries + 1} attempts: {last_exc}"
        )


# --- batching ---------------------------------------------------------------


def batch_score(
    backend: MaskScorer, requests_list: list[ScoreRequest]
) -> list[ScoreResponse | BackendError]:
    """Score a batch; each position holds a response or that request's error.

    Remote backends run up to ``concurrency`` requests in flight; everything
    else scores sequentially.  Order always matches the input.
    """

    def one(req: ScoreRequest) -> ScoreResponse | BackendError:
        try:
            return backend.score(req)
        except BackendError as exc:
            return exc

    if not requests_list:
        return []
    workers = getattr(backend, "concurrency", 1)
    if workers > 1 and len(requests_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, requests_list))
    return [one(req) for req in requests_list]
