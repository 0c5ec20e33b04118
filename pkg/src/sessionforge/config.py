"""Default bounds shared by the library entry points and the CLI."""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

ENV_VAR = "SESSIONFORGE_BOUND"


@dataclass(frozen=True)
class Bounds:
    subtype_k: int = 2  # anticipation window of the asynchronous check
    depth: int = 8  # unfoldings per global derivation
    queue_bound: int = 4  # messages per (sender, destination) pair
    probe_steps: int = 200
    seed: int = 0

    @classmethod
    def from_env(cls, environ=None) -> "Bounds":
        """``SESSIONFORGE_BOUND`` overrides both ``subtype_k`` and ``depth``."""
        environ = os.environ if environ is None else environ
        raw = environ.get(ENV_VAR)
        b = cls()
        if raw is None or raw.strip() == "":
            return b
        try:
            n = int(raw)
        except ValueError as e:
            raise ValueError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}") from e
        if n < 0:
            raise ValueError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}")
        return replace(b, subtype_k=n, depth=max(n, 1))
