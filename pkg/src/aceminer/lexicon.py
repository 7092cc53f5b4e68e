"""UMLS-style lexicon loading and candidate concept matching.

The lexicon file is a hand-writable TSV inspired by MRCONSO:

    CUI<TAB>surface form<TAB>P|S<TAB>semtype1|semtype2

``P`` marks a preferred surface form, ``S`` a synonym; the semantic-type
column is optional and ``#`` starts a comment line.
"""

import hashlib
import json
import os
import re
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .errors import CacheError, InvalidQueryError, LexiconFormatError, RemoteMatchError

CUI_RE = re.compile(r"^C\d{7}$")
_NON_ALNUM_RE = re.compile(r"[\W_]+", re.UNICODE)


def normalize(text: str) -> str:
    """Canonical matching form of a surface string.

    Lowercases, turns every non-alphanumeric character into a space,
    collapses space runs, and strips the ends. Idempotent.
    """
    return _NON_ALNUM_RE.sub(" ", text.lower()).strip()


def token_set(text: str) -> frozenset[str]:
    return frozenset(normalize(text).split())


def is_valid_cui(cui: str) -> bool:
    return bool(CUI_RE.match(cui))


@dataclass
class LexiconEntry:
    cui: str
    surface_form: str
    is_preferred: bool
    semantic_types: list[str] = field(default_factory=list)

    @property
    def normalized(self) -> str:
        return normalize(self.surface_form)


@dataclass(frozen=True)
class Candidate:
    """One ranked concept suggestion for a query label."""

    cui: str
    preferred_label: str
    score: float
    match_kind: str  # "exact" | "partial"
    is_preferred: bool = False


@dataclass
class CandidateList:
    query_label: str
    candidates: list[Candidate]

    @property
    def ambiguous(self) -> bool:
        return len({c.cui for c in self.candidates}) >= 2

    @property
    def cuis(self) -> list[str]:
        return [c.cui for c in self.candidates]


def rank_candidates(candidates: Iterable[Candidate], limit: int = 10) -> list[Candidate]:
    """Order candidates: score desc, exact before partial, preferred flag,
    then CUI ascending; truncated to ``limit``.

    The exact-before-partial tier keeps an exact match ahead of a
    token-permuted partial that also reaches score 1.0.
    """
    ordered = sorted(candidates, key=lambda c: _rank_key(c) + (c.cui,))
    return ordered[:limit]


class Lexicon:
    """Indexed collection of lexicon entries, immutable once loaded."""

    def __init__(self, entries: list[LexiconEntry]):
        self.entries = entries
        self.index: dict[str, list[int]] = {}
        self.token_index: dict[str, set[int]] = {}
        self._preferred_label: dict[str, str] = {}
        self._surfaces: dict[str, list[str]] = {}
        for i, entry in enumerate(entries):
            norm = entry.normalized
            self.index.setdefault(norm, []).append(i)
            for token in norm.split():
                self.token_index.setdefault(token, set()).add(i)
            if entry.is_preferred and entry.cui not in self._preferred_label:
                self._preferred_label[entry.cui] = entry.surface_form
            self._surfaces.setdefault(entry.cui, []).append(entry.surface_form)

    def __len__(self) -> int:
        return len(self.entries)

    def cuis(self) -> set[str]:
        return set(self._surfaces)

    def preferred_label(self, cui: str) -> str | None:
        """The preferred surface for a CUI, or its first surface as fallback."""
        label = self._preferred_label.get(cui)
        if label is not None:
            return label
        surfaces = self._surfaces.get(cui)
        return surfaces[0] if surfaces else None

    def surfaces(self, cui: str) -> list[str]:
        """All surface forms recorded for a CUI, in file order."""
        return list(self._surfaces.get(cui, ()))


def load_lexicon(source: TextIO | Iterable[str]) -> Lexicon:
    """Parse the TSV lexicon format, collapsing duplicate (CUI, surface) pairs."""
    entries: list[LexiconEntry] = []
    seen: dict[tuple[str, str], int] = {}
    for line_no, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 3:
            raise LexiconFormatError(
                f"expected at least 3 tab-separated fields, got {len(fields)}", line_no
            )
        cui, surface, flag = fields[0].strip(), fields[1], fields[2].strip()
        if not is_valid_cui(cui):
            raise LexiconFormatError(f"malformed CUI {cui!r}", line_no)
        if not surface.strip():
            raise LexiconFormatError("empty surface form", line_no)
        if flag not in ("P", "S"):
            raise LexiconFormatError(f"preferred flag must be P or S, got {flag!r}", line_no)
        semtypes = []
        if len(fields) >= 4 and fields[3].strip():
            semtypes = [t for t in fields[3].strip().split("|") if t]
        key = (cui, normalize(surface))
        if key in seen:
            prior = entries[seen[key]]
            prior.is_preferred = prior.is_preferred or flag == "P"
            for t in semtypes:
                if t not in prior.semantic_types:
                    prior.semantic_types.append(t)
            continue
        seen[key] = len(entries)
        entries.append(
            LexiconEntry(
                cui=cui,
                surface_form=surface.strip(),
                is_preferred=flag == "P",
                semantic_types=semtypes,
            )
        )
    return Lexicon(entries)


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


PARTIAL_THRESHOLD = 0.5
CANDIDATE_LIMIT = 10


def match_candidates(label: str, lexicon: Lexicon) -> CandidateList:
    """Rank lexicon concepts against a query label.

    Entries equal to the label after normalization are exact matches with
    score 1.0; other entries sharing tokens score their token-set Jaccard
    similarity and survive at >= 0.5. One candidate per CUI (its best
    match), at most ten returned.
    """
    norm = normalize(label)
    if not norm:
        raise InvalidQueryError(f"label {label!r} normalizes to the empty string")
    query_tokens = frozenset(norm.split())

    best: dict[str, Candidate] = {}

    def consider(entry: LexiconEntry, score: float, kind: str) -> None:
        cand = Candidate(
            cui=entry.cui,
            preferred_label=lexicon.preferred_label(entry.cui) or entry.surface_form,
            score=score,
            match_kind=kind,
            is_preferred=entry.is_preferred,
        )
        prior = best.get(entry.cui)
        if prior is None or _better(cand, prior):
            best[entry.cui] = cand

    for i in lexicon.index.get(norm, []):
        consider(lexicon.entries[i], 1.0, "exact")
    candidate_ids: set[int] = set()
    for token in query_tokens:
        candidate_ids.update(lexicon.token_index.get(token, ()))
    for i in sorted(candidate_ids):
        entry = lexicon.entries[i]
        entry_norm = entry.normalized
        if entry_norm == norm:
            continue
        score = jaccard(query_tokens, frozenset(entry_norm.split()))
        if score >= PARTIAL_THRESHOLD:
            consider(entry, score, "partial")

    return CandidateList(
        query_label=label,
        candidates=rank_candidates(best.values(), CANDIDATE_LIMIT),
    )


def _rank_key(c: Candidate) -> tuple:
    return (-c.score, c.match_kind != "exact", not c.is_preferred)


def _better(a: Candidate, b: Candidate) -> bool:
    return _rank_key(a) < _rank_key(b)


@dataclass
class RemoteMatcherConfig:
    """Descriptor of an external concept-matching HTTP service.

    The credential is read from the environment variable named by
    ``api_key_env`` and is never logged or echoed.
    """

    endpoint_url: str
    api_key_env: str = "ACEMINER_MATCHER_API_KEY"
    timeout: float = 10.0


def remote_match(label: str, config: RemoteMatcherConfig, cache_dir: str | Path) -> CandidateList:
    """Query the external matcher once per distinct normalized label.

    The raw response body is persisted under ``cache_dir`` keyed by the
    SHA-256 of the normalized label, so re-runs are byte-identical and
    offline.
    """
    norm = normalize(label)
    if not norm:
        raise InvalidQueryError(f"label {label!r} normalizes to the empty string")
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_path = cache_dir / (hashlib.sha256(norm.encode("utf-8")).hexdigest() + ".json")

    if cache_path.exists():
        try:
            raw = cache_path.read_bytes()
            payload = json.loads(raw.decode("utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CacheError(f"unreadable cache entry {cache_path}: {exc}") from exc
    else:
        raw = _fetch(label, norm, config)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise RemoteMatchError(label, f"malformed response: {exc}") from exc
        tmp = cache_path.with_suffix(".tmp")
        try:
            tmp.write_bytes(raw)
            os.replace(tmp, cache_path)
        except OSError as exc:
            raise CacheError(f"cannot write cache entry {cache_path}: {exc}") from exc

    return _response_to_candidates(label, norm, payload)


def _fetch(label: str, norm: str, config: RemoteMatcherConfig) -> bytes:
    params = {"string": norm}
    api_key = os.environ.get(config.api_key_env, "")
    if api_key:
        params["apiKey"] = api_key
    url = config.endpoint_url + ("&" if "?" in config.endpoint_url else "?")
    url += urllib.parse.urlencode(params)
    try:
        with urllib.request.urlopen(url, timeout=config.timeout) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError) as exc:
        raise RemoteMatchError(label, str(exc)) from exc


def _response_to_candidates(label: str, norm: str, payload: object) -> CandidateList:
    """Convert a matcher response to a ranked CandidateList.

    Two shapes are accepted: the UTS-style
    ``{"result": {"results": [{"ui":…, "name":…}]}}`` and the flat
    ``{"results": [{"cui":…, "label":…, "preferred":…}]}``. Responses
    carrying no score are rescored locally with the same exact/Jaccard
    rules as the offline matcher.
    """
    if not isinstance(payload, dict):
        raise RemoteMatchError(label, "response is not a JSON object")
    if isinstance(payload.get("result"), dict):
        rows = payload["result"].get("results", [])
        cui_key, label_key = "ui", "name"
    else:
        rows = payload.get("results", [])
        cui_key, label_key = "cui", "label"
    if not isinstance(rows, list):
        raise RemoteMatchError(label, "response results are not a list")

    query_tokens = frozenset(norm.split())
    out: dict[str, Candidate] = {}
    for row in rows:
        if not isinstance(row, dict):
            continue
        cui = str(row.get(cui_key, ""))
        if not is_valid_cui(cui):
            continue
        name = str(row.get(label_key, cui))
        if "score" in row:
            score = float(row["score"])
            kind = str(row.get("kind", "exact" if score >= 1.0 else "partial"))
        elif normalize(name) == norm:
            score, kind = 1.0, "exact"
        else:
            score = jaccard(query_tokens, token_set(name))
            kind = "partial"
            if score < PARTIAL_THRESHOLD:
                continue
        cand = Candidate(
            cui=cui,
            preferred_label=name,
            score=min(max(score, 0.0), 1.0),
            match_kind=kind if kind in ("exact", "partial") else "partial",
            is_preferred=bool(row.get("preferred", False)),
        )
        prior = out.get(cui)
        if prior is None or _better(cand, prior):
            out[cui] = cand
    return CandidateList(query_label=label, candidates=rank_candidates(out.values()))


class LexiconMatcher:
    """Callable adapter: label -> CandidateList against a loaded lexicon."""

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon

    def __call__(self, label: str) -> CandidateList:
        return match_candidates(label, self.lexicon)


class CachedRemoteMatcher:
    """Callable adapter for the external matcher with its response cache."""

    def __init__(self, config: RemoteMatcherConfig, cache_dir: str | Path):
        self.config = config
        self.cache_dir = cache_dir

    def __call__(self, label: str) -> CandidateList:
        return remote_match(label, self.config, self.cache_dir)


Matcher = Callable[[str], CandidateList]
