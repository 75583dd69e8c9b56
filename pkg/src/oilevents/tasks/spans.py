"""Ways of turning an event trigger into one vector for property
classification: a fixed token window, the trigger's dependency subtree, or
self-attentive pooling over a span."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..graph import DepTree

WINDOW = "FixedWindow"
SUBTREE = "DepSubtree"
ATTENTIVE = "SelfAttentiveSpan"


@dataclass(frozen=True)
class SpanStrategy:
    kind: str
    r: int = 1                    # window radius, FixedWindow only
    scope: str = "sentence"       # attention scope: "sentence" or "trigger"

    def __post_init__(self):
        if self.kind not in (WINDOW, SUBTREE, ATTENTIVE):
            raise ValueError(f"unknown span strategy {self.kind!r}")
        if self.r < 0:
            raise ValueError("window radius must be non-negative")
        if self.scope not in ("sentence", "trigger"):
            raise ValueError(f"unknown attention scope {self.scope!r}")

    @classmethod
    def parse(cls, text: str) -> "SpanStrategy":
        """``FixedWindow(r=1)``, ``FixedWindow(2)``, ``DepSubtree``, ``SelfAttentiveSpan`` ..."""
        name, _, rest = text.strip().partition("(")
        args = rest.rstrip(")").strip()
        if name == WINDOW:
            return cls(WINDOW, r=int(args.split("=")[-1]) if args else 1)
        if name == ATTENTIVE and args:
            return cls(ATTENTIVE, scope=args.split("=")[-1].strip())
        return cls(name)

    def __str__(self) -> str:
        if self.kind == WINDOW:
            return f"{WINDOW}(r={self.r})"
        if self.kind == ATTENTIVE and self.scope != "sentence":
            return f"{ATTENTIVE}(scope={self.scope})"
        return self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "r": self.r, "scope": self.scope}


def trigger_head_token(trigger) -> int:
    """Windows are centred on the first token of the trigger span."""
    return trigger[0]


def extract_span_window(sent, trigger, r: int) -> list[int]:
    if r < 0:
        raise ValueError("r must be non-negative")
    n = len(sent.tokens) if hasattr(sent, "tokens") else int(sent)
    i = trigger_head_token(trigger)
    return list(range(max(0, i - r), min(n - 1, i + r) + 1))


def window_slots(n: int, trigger, r: int) -> list[Optional[int]]:
    """The ``2r+1`` window positions; None marks a slot outside the sentence."""
    i = trigger_head_token(trigger)
    return [j if 0 <= j < n else None for j in range(i - r, i + r + 1)]


def extract_span_subtree(tree: DepTree, trigger) -> list[int]:
    """The trigger's syntactic head and everything it dominates."""
    return tree.descendants(tree.span_head(trigger[0], trigger[1]))


def attention_scope(sent, trigger, strategy: SpanStrategy) -> tuple[int, int]:
    n = len(sent.tokens)
    if strategy.scope == "trigger" and trigger is not None:
        return trigger[0], trigger[1]
    return 0, n - 1


# ------------------------------------------------------- attentive pooling


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def extract_span_attentive(token_feats: np.ndarray, span: tuple, w: np.ndarray,
                           return_weights: bool = False):
    """``sum_t alpha_t h_t`` over tokens ``span[0]..span[1]`` (inclusive) with
    ``alpha = softmax(h_t . w)``."""
    H = np.asarray(token_feats, dtype=float)
    start, end = int(span[0]), int(span[1])
    if not 0 <= start <= end < H.shape[0]:
        raise IndexError(f"span {span} outside {H.shape[0]} tokens")
    Hs = H[start:end + 1]
    alpha = _softmax(Hs @ np.asarray(w, dtype=float))
    out = alpha @ Hs
    return (out, alpha) if return_weights else out


def attentive_backward(token_feats: np.ndarray, span: tuple, w: np.ndarray, grad_out: np.ndarray):
    """Gradients of a scalar loss through attentive pooling.

    Returns (dL/dH over the full matrix, dL/dw).
    """
    H = np.asarray(token_feats, dtype=float)
    start, end = int(span[0]), int(span[1])
    Hs = H[start:end + 1]
    w = np.asarray(w, dtype=float)
    g = np.asarray(grad_out, dtype=float)
    alpha = _softmax(Hs @ w)
    dalpha = Hs @ g
    dscore = alpha * (dalpha - alpha @ dalpha)
    dw = Hs.T @ dscore
    dH = np.zeros_like(H)
    dH[start:end + 1] = alpha[:, None] * g[None, :] + dscore[:, None] * w[None, :]
    return dH, dw
