"""Independent brute-force reference for mention matching.

Everything here is written from scratch against the matching rules, without
touching the package's tokenizer, automaton, or scan engine: character-walk
tokenization, per-pattern per-position comparison, and an O(n^2)
pick-the-leftmost-longest overlap resolution. Tests treat this module as
ground truth.
"""


def oracle_tokenize(text):
    """Maximal alphanumeric runs via a plain character walk."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isalnum():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            tokens.append((i, j, text[i:j].lower()))
            i = j
        else:
            i += 1
    return tokens


def oracle_pattern(surface):
    """Normalized token-sequence string for one terminology surface."""
    return " ".join(tok for _, _, tok in oracle_tokenize(surface))


def oracle_patterns(terminology):
    """pattern string -> set of CUIs, from accepted entries only."""
    patterns = {}
    for entry in terminology.entries:
        if entry.status != "accepted":
            continue
        for surface in [entry.preferred_label, *entry.synonyms]:
            pat = oracle_pattern(surface)
            if pat:
                patterns.setdefault(pat, set()).add(entry.cui)
    return patterns


def oracle_raw(text, patterns):
    """Every occurrence: list of (start_char, end_char, pattern_string)."""
    tokens = oracle_tokenize(text)
    words = [t[2] for t in tokens]
    raw = []
    for pat in patterns:
        ptoks = pat.split(" ")
        size = len(ptoks)
        for i in range(len(words) - size + 1):
            if words[i : i + size] == ptoks:
                raw.append((tokens[i][0], tokens[i + size - 1][1], pat))
    return raw


def oracle_resolve_spans(spans):
    """Repeatedly keep the leftmost-longest remaining span and drop every
    distinct span overlapping it."""
    remaining = sorted(set(spans))
    kept = []
    while remaining:
        best = min(remaining, key=lambda se: (se[0], se[0] - se[1]))
        kept.append(best)
        remaining = [
            se for se in remaining if se != best and (se[1] <= best[0] or se[0] >= best[1])
        ]
    return sorted(kept)


def oracle_mentions(text, patterns, resolve=True):
    """Set of (start, end, cui) the matcher must produce."""
    raw = oracle_raw(text, patterns)
    span_patterns = {}
    for start, end, pat in raw:
        span_patterns.setdefault((start, end), set()).add(pat)
    spans = span_patterns.keys()
    if resolve:
        spans = oracle_resolve_spans(spans)
    out = set()
    for span in spans:
        for pat in span_patterns[span]:
            for cui in patterns[pat]:
                out.add((span[0], span[1], cui))
    return out
