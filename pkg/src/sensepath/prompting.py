"""Prompt construction and parsing for hierarchy-path prediction.

The main template family is cloze-style: soft-token placeholders, the label
tree written out as text, the two arguments with a connective mask between
them, and a ``The path is`` tail holding the top and second masks.  Variants
drop the tree text, the cloze tail, or both; a single-mask variant asks for
the whole path at once; three chat templates cover zero-shot usage of
instruction-following models.

Rendering is deliberately byte-stable: golden tests pin every variant, so
any format change here is a contract change.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from sensepath.hierarchy import (
    ROLE_CONNECTIVE,
    ROLE_DEPTH,
    ROLE_SECOND,
    ROLE_TOP,
    ROLE_WHOLE_PATH,
    LabelHierarchy,
    SensePath,
)

MASK_MARKER = "<extra_mask_{k}>"
SOFT_MARKER = "<soft_{i}>"

VARIANTS = (
    "discoprompt",
    "no_tree",
    "no_cloze",
    "no_discrete",
    "t5_adapt",
    "chat_label",
    "chat_label_conn",
    "chat_structure",
)
CHAT_KINDS = ("label", "label_conn", "structure")


class PromptError(ValueError):
    pass


class PathParseError(ValueError):
    """Raised when free-form text contains no recognizable sense path."""


# --- template model ---------------------------------------------------------


@dataclass(frozen=True)
class SoftTokens:
    count: int


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class TreePrompt:
    """The full path list as text, terminated with a period."""


@dataclass(frozen=True)
class Arg1:
    pass


@dataclass(frozen=True)
class Arg2:
    pass


@dataclass(frozen=True)
class Mask:
    role: str


Segment = SoftTokens | Literal | TreePrompt | Arg1 | Arg2 | Mask


@dataclass(frozen=True)
class PromptTemplate:
    variant: str
    segments: tuple[Segment, ...]
    soft_token_count: int = 20

    def mask_roles(self) -> tuple[str, ...]:
        return tuple(s.role for s in self.segments if isinstance(s, Mask))

    def __post_init__(self) -> None:
        if not self.segments:
            raise PromptError("template has no segments")
        if self.soft_token_count < 0:
            raise PromptError("soft token count must be >= 0")
        roles = self.mask_roles()
        if len(set(roles)) != len(roles):
            raise PromptError(f"duplicate mask roles in template: {roles}")


def template_for(variant: str, soft_token_count: int | None = None) -> PromptTemplate:
    """Build the canonical template for a variant.

    Cloze variants default to 20 soft tokens; the single-mask path-generation
    variant defaults to none (it targets the fine-tuning setup).
    """
    if variant.startswith("chat_"):
        raise PromptError(f"{variant!r} is a chat template; use chat_prompt()")
    if variant not in VARIANTS:
        raise PromptError(f"unknown template variant {variant!r}")
    cloze = (Literal("The path is"),)
    arrow = (Literal("->"),)
    three_masks = (Mask(ROLE_CONNECTIVE),)
    head: tuple[Segment, ...]
    if variant == "t5_adapt":
        soft = 0 if soft_token_count is None else soft_token_count
        segments: tuple[Segment, ...] = (
            SoftTokens(soft),
            TreePrompt(),
            Arg1(),
            Arg2(),
            *cloze,
            Mask(ROLE_WHOLE_PATH),
        )
        return PromptTemplate(variant=variant, segments=segments, soft_token_count=soft)
    soft = 20 if soft_token_count is None else soft_token_count
    tree: tuple[Segment, ...] = () if variant in ("no_tree", "no_discrete") else (TreePrompt(),)
    tail: tuple[Segment, ...] = () if variant in ("no_cloze", "no_discrete") else cloze
    segments = (
        SoftTokens(soft),
        *tree,
        Arg1(),
        *three_masks,
        Arg2(),
        *tail,
        Mask(ROLE_TOP),
        *arrow,
        Mask(ROLE_SECOND),
    )
    return PromptTemplate(variant=variant, segments=segments, soft_token_count=soft)


# --- rendering --------------------------------------------------------------


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    mask_spans: dict[str, tuple[int, int]]
    candidate_sets: dict[str, tuple[str, ...]]
    soft_token_count: int
    variant: str

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "mask_spans": {r: list(span) for r, span in self.mask_spans.items()},
            "candidate_sets": {r: list(c) for r, c in self.candidate_sets.items()},
            "soft_tokens": self.soft_token_count,
            "variant": self.variant,
        }


def tree_prompt(h: LabelHierarchy) -> str:
    """All paths serialized and joined by '; ', no trailing separator."""
    if h.depth < 3:
        raise PromptError("tree prompt requires a hierarchy with a connective layer")
    return "; ".join(p.serialize() for p in h.paths)


def candidate_set(h: LabelHierarchy, role: str) -> tuple[str, ...]:
    """Verbalizer candidates for one mask role, in hierarchy enumeration order."""
    if role == ROLE_WHOLE_PATH:
        return tuple(p.serialize() for p in h.paths)
    if role not in ROLE_DEPTH:
        raise PromptError(f"unknown mask role {role!r}")
    return h.surfaces_at(ROLE_DEPTH[role])


def render(
    template: PromptTemplate,
    instance,
    h: LabelHierarchy,
    fill_connective: str | None = None,
) -> RenderedPrompt:
    """Render a template for one argument pair.

    ``instance`` needs ``arg1`` and ``arg2`` attributes.  With
    ``fill_connective`` set, the connective mask is replaced by that literal
    text (the explicit-relation adaptation) and the remaining masks are
    renumbered; the connective role then carries no distribution.

    Mask spans are tracked while the text is assembled, so they index the
    placeholder markers exactly.
    """
    arg1 = (getattr(instance, "arg1", "") or "").strip()
    arg2 = (getattr(instance, "arg2", "") or "").strip()
    if not arg1 or not arg2:
        raise PromptError("instance must have non-empty arg1 and arg2")

    pieces: list[str] = []
    mask_spans: dict[str, tuple[int, int]] = {}
    offset = 0

    def push(piece: str, role: str | None = None) -> None:
        nonlocal offset
        if not piece:
            return
        if pieces:
            offset += 1  # the joining space
        if role is not None:
            mask_spans[role] = (offset, offset + len(piece))
        pieces.append(piece)
        offset += len(piece)

    mask_index = 0
    for seg in template.segments:
        if isinstance(seg, SoftTokens):
            push(" ".join(SOFT_MARKER.format(i=i) for i in range(seg.count)))
        elif isinstance(seg, TreePrompt):
            push(tree_prompt(h) + ".")
        elif isinstance(seg, Arg1):
            push(arg1)
        elif isinstance(seg, Arg2):
            push(arg2)
        elif isinstance(seg, Literal):
            push(seg.text)
        elif isinstance(seg, Mask):
            if seg.role == ROLE_CONNECTIVE and fill_connective is not None:
                push(fill_connective.strip())
            else:
                push(MASK_MARKER.format(k=mask_index), role=seg.role)
                mask_index += 1
        else:  # pragma: no cover - segment union is closed
            raise PromptError(f"unknown segment {seg!r}")

    text = " ".join(pieces)
    candidates = {role: candidate_set(h, role) for role in mask_spans}
    return RenderedPrompt(
        text=text,
        mask_spans=mask_spans,
        candidate_sets=candidates,
        soft_token_count=template.soft_token_count,
        variant=template.variant,
    )


# --- chat templates ---------------------------------------------------------

_CHAT_PHRASE = {"label": "label", "label_conn": "and connective", "structure": "path"}


def chat_prompt(kind: str, instance, h: LabelHierarchy) -> str:
    """Zero-shot chat template: question plus the numbered candidate list."""
    if kind not in CHAT_KINDS:
        raise PromptError(f"unknown chat template kind {kind!r}; expected one of {CHAT_KINDS}")
    arg1 = (getattr(instance, "arg1", "") or "").strip()
    arg2 = (getattr(instance, "arg2", "") or "").strip()
    if not arg1 or not arg2:
        raise PromptError("instance must have non-empty arg1 and arg2")
    header = (
        f"Argument 1: {arg1} Argument 2: {arg2} "
        f"What is the relation {_CHAT_PHRASE[kind]} between Argument 1 and Argument 2? "
        "Select from the candidates."
    )
    lines = []
    for i, p in enumerate(h.paths, 1):
        if kind == "label":
            lines.append(f"{i}. {p.top.label}.{p.second.label}")
        elif kind == "label_conn":
            lines.append(f"{i}. {p.top.label}.{p.second.label}, {p.leaf.label}")
        else:
            lines.append(f"{i}. {p.serialize()}")
    return header + "\n" + "\n".join(lines)


# --- parsing generated paths ------------------------------------------------


def _label_pattern(label: str) -> str:
    # Word-ish boundaries that also work for multi-word labels.
    return r"(?<![A-Za-z])" + re.escape(label) + r"(?![A-Za-z])"


def parse_path(text: str, h: LabelHierarchy) -> SensePath:
    """Map free-form generated text to an enumerated sense path.

    Accepts the arrow forms ``Top -> Second`` and ``Top -> Second -> conn``
    and the dotted form ``Top.Second``, case-insensitively; the earliest
    match in the text wins, preferring the longest form at a given position.
    The connective is inferred from the hierarchy when absent.  Text with no
    valid (parent, child) pair raises PathParseError.
    """
    best: tuple[int, int, int] | None = None  # (start, -length, path id)
    best_path: SensePath | None = None
    arrow = r"\s*->\s*"
    for p in h.paths:
        top = _label_pattern(p.top.label)
        second = _label_pattern(p.second.label)
        leaf = _label_pattern(p.leaf.label)
        for pattern in (
            top + arrow + second + arrow + leaf,
            top + arrow + second,
            top + r"\s*\.\s*" + second,
        ):
            m = re.search(pattern, text, flags=re.IGNORECASE)
            if m is None:
                continue
            key = (m.start(), -(m.end() - m.start()), p.id)
            if best is None or key < best:
                best = key
                best_path = p
    if best_path is None:
        raise PathParseError(f"no recognizable sense path in {text!r}")
    return best_path
