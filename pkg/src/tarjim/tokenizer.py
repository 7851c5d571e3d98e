"""Tokenizer contract and the default byte-level implementation.

Training-data composition only needs three guarantees from a tokenizer:
lossless round-trip on arbitrary UTF-8, single-id special tokens, and
special ids never occurring in encodings of ordinary text. The default
implementation maps each UTF-8 byte to its own id (0-255) and reserves ids
above 255 for the special tokens, which makes every packing and masking
property exactly checkable. Production subword vocabularies can be plugged
in through the same interface.
"""

from __future__ import annotations

import re
from typing import Protocol, runtime_checkable

ENGLISH_TAG = "<|English|>"
ARABIC_TAG = "<|Arabic|>"
END_OF_TEXT = "<|endoftext|>"


@runtime_checkable
class Tokenizer(Protocol):
    """Behavioral contract: decode(encode(t)) == t for any UTF-8 t."""

    @property
    def eos_id(self) -> int: ...

    @property
    def special_ids(self) -> dict[str, int]: ...

    def encode(self, text: str) -> list[int]: ...

    def decode(self, ids: list[int]) -> str: ...


class ByteTokenizer:
    """One token per UTF-8 byte; special tokens get reserved ids >= 256."""

    def __init__(self) -> None:
        self._specials = {END_OF_TEXT: 256, ENGLISH_TAG: 257, ARABIC_TAG: 258}
        self._by_id = {i: s for s, i in self._specials.items()}
        self._split = re.compile(
            "(" + "|".join(re.escape(s) for s in self._specials) + ")"
        )

    @property
    def eos_id(self) -> int:
        return self._specials[END_OF_TEXT]

    @property
    def special_ids(self) -> dict[str, int]:
        return dict(self._specials)

    @property
    def newline_ids(self) -> list[int]:
        """Ids the separator newline tokenizes to (one byte id here)."""
        return self.encode("\n")

    @property
    def vocab_size(self) -> int:
        return 256 + len(self._specials)

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for chunk in self._split.split(text):
            if not chunk:
                continue
            special = self._specials.get(chunk)
            if special is not None:
                ids.append(special)
            else:
                ids.extend(chunk.encode("utf-8"))
        return ids

    def decode(self, ids: list[int]) -> str:
        parts: list[str] = []
        pending: bytearray = bytearray()
        for i in ids:
            if i < 256:
                pending.append(i)
            else:
                if pending:
                    parts.append(pending.decode("utf-8"))
                    pending = bytearray()
                parts.append(self._by_id[i])
        if pending:
            parts.append(pending.decode("utf-8"))
        return "".join(parts)
