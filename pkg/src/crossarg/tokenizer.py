"""Byte-pair subword tokenizer with reserved-token registration.

Words are whitespace-delimited and carry a leading ``▁`` marker, so decoding
restores single spaces between words. Reserved tokens are cut out of the
text before subword segmentation and never merge with natural pieces.
"""
from __future__ import annotations

import heapq
import re
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

PAD = "<pad>"
UNK = "<unk>"
EOS = "</s>"
WORD_MARK = "▁"


class TokenizerError(ValueError):
    pass


def _reserved_pattern(reserved: Sequence[str]) -> Optional[re.Pattern]:
    if not reserved:
        return None
    alts = sorted(reserved, key=len, reverse=True)
    return re.compile("(" + "|".join(re.escape(t) for t in alts) + ")")


class SubwordTokenizer:
    def __init__(self, reserved: Iterable[str] = (), alphabet: Iterable[str] = (), merges: Iterable[Tuple[str, str]] = ()):
        base = [PAD, EOS, UNK]
        self.reserved: List[str] = list(dict.fromkeys([*base, *reserved]))
        self.merges: List[Tuple[str, str]] = [tuple(m) for m in merges]
        natural = list(dict.fromkeys([*alphabet, *(a + b for a, b in self.merges)]))
        clash = set(natural) & set(self.reserved)
        if clash:
            raise TokenizerError(f"natural pieces collide with reserved tokens: {sorted(clash)}")
        self.id_to_token: List[str] = self.reserved + natural
        self.token_to_id: Dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        self._ranks = {m: i for i, m in enumerate(self.merges)}
        self._reserved_set = set(self.reserved)
        self._pattern = _reserved_pattern([t for t in self.reserved if t not in (PAD, UNK)])
        self._cache: Dict[str, List[str]] = {}

    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD]

    @property
    def eos_id(self) -> int:
        return self.token_to_id[EOS]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK]

    def __len__(self) -> int:
        return len(self.id_to_token)

    @property
    def vocab_size(self) -> int:
        return len(self.id_to_token)

    def natural_vocabulary(self) -> set:
        return set(self.id_to_token) - self._reserved_set

    def reserved_ids(self) -> set:
        return {self.token_to_id[t] for t in self.reserved}

    def is_reserved(self, token_id: int) -> bool:
        return self.id_to_token[token_id] in self._reserved_set

    # -- segmentation -------------------------------------------------------
    def _segments(self, text: str) -> List[Tuple[bool, str]]:
        if self._pattern is None:
            return [(False, text)]
        out = []
        for i, seg in enumerate(self._pattern.split(text)):
            if seg:
                out.append((i % 2 == 1, seg))
        return out

    def _bpe(self, word: str) -> List[str]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = list(word)
        while len(symbols) > 1:
            best = None
            best_rank = None
            for i in range(len(symbols) - 1):
                r = self._ranks.get((symbols[i], symbols[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = i, r
            if best is None:
                break
            symbols[best:best + 2] = [symbols[best] + symbols[best + 1]]
        self._cache[word] = symbols
        return symbols

    def tokenize(self, text: str) -> List[str]:
        pieces: List[str] = []
        for is_reserved, seg in self._segments(text):
            if is_reserved:
                pieces.append(seg)
                continue
            for word in seg.split():
                pieces.extend(self._bpe(WORD_MARK + word))
        return pieces

    def encode(self, text: str, add_eos: bool = False) -> List[int]:
        unk = self.unk_id
        ids = [self.token_to_id.get(p, unk) for p in self.tokenize(text)]
        if add_eos:
            ids.append(self.eos_id)
        return ids

    def decode(self, ids: Iterable[int], skip: Iterable[int] = ()) -> str:
        skip = set(skip)
        parts: List[str] = []
        for i in ids:
            if i in skip:
                continue
            tok = self.id_to_token[i]
            if tok in self._reserved_set:
                parts.append(f" {tok} ")
            else:
                parts.append(tok.replace(WORD_MARK, " "))
        return re.sub(r"\s+", " ", "".join(parts)).strip()

    # -- training -----------------------------------------------------------
    @classmethod
    def train(
        cls,
        texts: Iterable[str],
        reserved: Iterable[str] = (),
        num_merges: int = 4000,
        min_frequency: int = 1,
    ) -> "SubwordTokenizer":
        """Learn merges over ``texts``; ties break on the lexicographically smaller pair."""
        reserved = list(reserved)
        scratch = cls(reserved)
        counts: Counter = Counter()
        for text in texts:
            for is_reserved, seg in scratch._segments(text):
                if not is_reserved:
                    counts.update(WORD_MARK + w for w in seg.split())
        vocab_words = sorted(counts)
        words = [list(w) for w in vocab_words]
        freqs = [counts[w] for w in vocab_words]
        alphabet = sorted({c for w in vocab_words for c in w})

        pair_counts: Counter = Counter()
        where: Dict[Tuple[str, str], set] = defaultdict(set)
        for idx, w in enumerate(words):
            for pair in zip(w, w[1:]):
                pair_counts[pair] += freqs[idx]
                where[pair].add(idx)
        heap = [(-c, p) for p, c in pair_counts.items()]
        heapq.heapify(heap)

        merges: List[Tuple[str, str]] = []
        while len(merges) < num_merges and heap:
            neg, pair = heapq.heappop(heap)
            current = pair_counts.get(pair, 0)
            if current != -neg:
                continue  # stale heap entry
            if current < min_frequency:
                break
            merges.append(pair)
            merged = pair[0] + pair[1]
            touched: set = set()
            for idx in sorted(where.pop(pair, ())):
                w = words[idx]
                f = freqs[idx]
                for p in zip(w, w[1:]):
                    pair_counts[p] -= f
                    touched.add(p)
                out: List[str] = []
                i = 0
                while i < len(w):
                    if i < len(w) - 1 and (w[i], w[i + 1]) == pair:
                        out.append(merged)
                        i += 2
                    else:
                        out.append(w[i])
                        i += 1
                words[idx] = out
                for p in zip(out, out[1:]):
                    pair_counts[p] += f
                    where[p].add(idx)
                    touched.add(p)
            pair_counts.pop(pair, None)
            for p in touched:
                c = pair_counts.get(p, 0)
                if c > 0:
                    heapq.heappush(heap, (-c, p))
                else:
                    pair_counts.pop(p, None)
        return cls(reserved, alphabet, merges)

    def to_dict(self) -> dict:
        return {"reserved": self.reserved, "alphabet": self._alphabet(), "merges": [list(m) for m in self.merges]}

    def _alphabet(self) -> List[str]:
        merged = {a + b for a, b in self.merges}
        n_res = len(self.reserved)
        return [t for t in self.id_to_token[n_res:] if t not in merged]

    @classmethod
    def from_dict(cls, d: dict) -> "SubwordTokenizer":
        return cls(d["reserved"], d["alphabet"], [tuple(m) for m in d["merges"]])
