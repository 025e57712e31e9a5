"""
Character vocabulary for CTC

Index 0 is the CTC blank; characters occupy indices 1..V in list order. An
optional UNKNOWN character (last symbol) absorbs out-of-vocabulary text coming
back from open-vocabulary recognizers.
"""

from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence

DEFAULT_CHARSET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
UNKNOWN_CHAR = "?"
BLANK_INDEX = 0


@dataclass(frozen=True)
class CharVocab:
    """Ordered character inventory plus a reserved blank"""
    chars: tuple[str, ...]
    unknown: Optional[str] = None

    def __post_init__(self):
        if len(set(self.chars)) != len(self.chars):
            raise ValueError("CharVocab: characters must be unique")
        for ch in self.chars:
            if len(ch) != 1:
                raise ValueError(f"CharVocab: {ch!r} is not a single character")
        if self.unknown is not None and self.unknown in self.chars:
            raise ValueError(f"CharVocab: unknown marker {self.unknown!r} collides with a character")

    @classmethod
    def default(cls, with_unknown: bool = True) -> "CharVocab":
        """A-Z and 0-9, plus the UNKNOWN marker"""
        return cls(tuple(DEFAULT_CHARSET), UNKNOWN_CHAR if with_unknown else None)

    @classmethod
    def from_chars(cls, chars: Iterable[str], unknown: Optional[str] = None) -> "CharVocab":
        return cls(tuple(chars), unknown)

    @property
    def symbols(self) -> tuple[str, ...]:
        """Every emittable symbol, in head order (excluding blank)"""
        if self.unknown is None:
            return self.chars
        return self.chars + (self.unknown,)

    @property
    def blank_index(self) -> int:
        return BLANK_INDEX

    @property
    def size(self) -> int:
        """Number of non-blank symbols"""
        return len(self.symbols)

    @property
    def num_classes(self) -> int:
        """Width of a log-probability row: symbols plus blank"""
        return self.size + 1

    def contains(self, text: str) -> bool:
        """True when every character of text is a real (non-UNKNOWN) character"""
        return all(ch in self.chars for ch in text)

    def encode(self, text: str, strict: bool = True) -> list[int]:
        """
        Map text to class indices.

        Args:
            text: string to encode
            strict: if False, out-of-vocabulary characters map to UNKNOWN
                (requires the vocabulary to carry one)

        Raises:
            ValueError: character not in the vocabulary and no fallback applies
        """
        lookup = self._lookup()
        indices = []
        for ch in text:
            if ch in lookup:
                indices.append(lookup[ch])
            elif not strict and self.unknown is not None:
                indices.append(lookup[self.unknown])
            else:
                raise ValueError(f"character {ch!r} not in vocabulary")
        return indices

    def decode(self, indices: Sequence[int]) -> str:
        """Indices to text; blanks are skipped, no repeat collapsing"""
        symbols = self.symbols
        return "".join(symbols[i - 1] for i in indices if i != BLANK_INDEX)

    def _lookup(self) -> dict[str, int]:
        return {ch: i + 1 for i, ch in enumerate(self.symbols)}

    def to_dict(self) -> dict[str, Any]:
        return {"chars": "".join(self.chars), "unknown": self.unknown}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CharVocab":
        return cls(tuple(data["chars"]), data.get("unknown"))
