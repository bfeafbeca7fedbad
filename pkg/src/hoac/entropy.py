# -*- coding: utf-8 -*-
"""Self-contained block-sorting entropy coder.

Lossless pipeline per block: byte-level run-length pre-pass, Burrows-Wheeler
transform (index transmitted, no sentinel), move-to-front, zero-run coding
with two run symbols in bijective base 2, and canonical Huffman coding.
Blocks are self-delimiting and individually checksummed, so a corrupted
stream is detected rather than silently mis-decoded.

Stream layout (all integers little-endian):

    magic b"HCE1"
    repeated blocks:
        u32 raw_len       bytes of source data in this block
        u32 crc32         of the raw block bytes
        u32 bwt_index     primary index of the Burrows-Wheeler transform
        u32 bwt_len       length of the transformed string
        u8  table_mode    0 = sparse symbol table, 1 = dense
        table             sparse: u16 count, then (u16 symbol, u8 len) each
                          dense: 258 u8 code lengths
        u32 payload_len   bytes of Huffman payload
        payload           MSB-first packed code bits, ends with EOB symbol

Encoding is pure; blocks could be produced in parallel and concatenated in
order.
"""
import zlib

import numpy as np

MAGIC = b"HCE1"
DEFAULT_BLOCK_SIZE = 64 * 1024
RUN_A = 0
RUN_B = 1
EOB = 257
NUM_SYMBOLS = 258


class EntropyDecodeError(ValueError):
    """Raised when an entropy stream cannot be decoded.

    Carries the index of the offending block in `block_index`.
    """

    def __init__(self, message, block_index=None):
        super().__init__(message)
        self.block_index = block_index


# ---------------------------------------------------------------------------
# stage 1: byte run-length pre-pass (bounds BWT worst cases, eats long runs)

def _four_run_starts(a):
    m = (a[:-3] == a[1:-2]) & (a[1:-2] == a[2:-1]) & (a[2:-1] == a[3:])
    return np.flatnonzero(m)


def _rle1_encode(data):
    data = bytes(data)
    a = np.frombuffer(data, dtype=np.uint8)
    n = len(a)
    if n < 4:
        return data
    cand = _four_run_starts(a)
    if len(cand) == 0:
        return data
    out = bytearray()
    i = 0
    ci = 0
    nc = len(cand)
    while i < n:
        while ci < nc and cand[ci] < i:
            ci += 1
        if ci == nc:
            out += data[i:]
            break
        st = int(cand[ci])
        out += data[i:st]
        b = int(a[st])
        j = st + 4
        stop = min(n, st + 259)
        while j < stop and a[j] == b:
            j += 1
        out += data[st:st + 4]
        out.append(j - st - 4)
        i = j
    return bytes(out)


def _rle1_decode(data):
    data = bytes(data)
    a = np.frombuffer(data, dtype=np.uint8)
    n = len(a)
    if n < 4:
        return data
    cand = _four_run_starts(a)
    if len(cand) == 0:
        return data
    out = bytearray()
    i = 0
    ci = 0
    nc = len(cand)
    while i < n:
        while ci < nc and cand[ci] < i:
            ci += 1
        if ci == nc:
            out += data[i:]
            break
        st = int(cand[ci])
        out += data[i:st + 4]
        if st + 4 >= n:
            raise ValueError("truncated run-length count")
        out += bytes([a[st]]) * int(a[st + 4])
        i = st + 5
    return bytes(out)


# ---------------------------------------------------------------------------
# stage 2: Burrows-Wheeler transform of the full block (cyclic rotations)

def _bwt_encode(data):
    s = np.frombuffer(data, dtype=np.uint8)
    n = len(s)
    if n == 0:
        return b"", 0
    if n == 1:
        return data, 0
    rank = np.asarray(s, dtype=np.int64)
    idx = np.arange(n)
    k = 1
    while k < n:
        key2 = rank[(idx + k) % n]
        order = np.lexsort((key2, rank))
        newrank = np.empty(n, dtype=np.int64)
        r = rank[order]
        r2 = key2[order]
        changed = np.empty(n, dtype=bool)
        changed[0] = False
        changed[1:] = (r[1:] != r[:-1]) | (r2[1:] != r2[:-1])
        newrank[order] = np.cumsum(changed)
        rank = newrank
        if rank.max() == n - 1:
            break
        k *= 2
    # Periodic blocks leave identical rotations tied; a stable position
    # tie-break keeps the transform invertible (the LF walk then cycles
    # through one period, which reproduces the repetition exactly).
    sa = np.lexsort((idx, rank))
    bwt = s[(sa - 1) % n]
    index = int(np.flatnonzero(sa == 0)[0])
    return bwt.tobytes(), index


def _bwt_decode(data, index):
    b = np.frombuffer(data, dtype=np.uint8)
    n = len(b)
    if n == 0:
        return b""
    if not 0 <= index < n:
        raise ValueError("BWT index out of range")
    lf = np.argsort(b, kind="stable").tolist()
    out = bytearray(n)
    j = lf[index]
    for i in range(n):
        out[i] = b[j]
        j = lf[j]
    return bytes(out)


# ---------------------------------------------------------------------------
# stage 3: move-to-front

def _mtf_encode(data, chunk=16384):
    s = np.frombuffer(data, dtype=np.uint8).astype(np.intp)
    n = len(s)
    if n == 0:
        return np.empty(0, dtype=np.uint8)
    # The move-to-front list equals all symbols sorted by decreasing index of
    # their most recent occurrence, with never-seen symbols trailing in value
    # order.  So rank(i) counts symbols whose last occurrence before i is
    # more recent than that of s[i].  Negative sentinels encode the initial
    # 0..255 ordering.
    ranks = np.empty(n, dtype=np.uint8)
    carry = (-1 - np.arange(256)).astype(np.int32)
    for start in range(0, n, chunk):
        sc = s[start:start + chunk]
        m = len(sc)
        pos = np.arange(m, dtype=np.int32)
        M = np.full((m, 256), np.iinfo(np.int32).min, dtype=np.int32)
        M[pos, sc] = start + pos
        np.maximum.accumulate(M, axis=0, out=M)
        last = np.empty((m, 256), dtype=np.int32)
        last[0] = carry
        np.maximum(M[:-1], carry, out=last[1:])
        own = last[pos, sc]
        ranks[start:start + chunk] = np.sum(last > own[:, None], axis=1)
        carry = np.maximum(M[-1], carry)
    return ranks


def _mtf_decode(ranks):
    table = list(range(256))
    out = bytearray(len(ranks))
    for i, r in enumerate(ranks):
        v = table.pop(r)
        table.insert(0, v)
        out[i] = v
    return bytes(out)


# ---------------------------------------------------------------------------
# stage 4: zero-run tokens; nonzero rank v becomes token v+1

def _tokens_encode(ranks):
    tokens = []
    n = len(ranks)
    nz = np.flatnonzero(ranks)
    prev = 0
    for p in nz:
        if p > prev:
            tokens.extend(_run_tokens(p - prev))
        tokens.append(int(ranks[p]) + 1)
        prev = p + 1
    if n > prev:
        tokens.extend(_run_tokens(n - prev))
    tokens.append(EOB)
    return np.asarray(tokens, dtype=np.int64)


def _run_tokens(run):
    # bijective base 2 with digits {1: RUN_A, 2: RUN_B}
    digits = []
    while run > 0:
        if run % 2 == 1:
            digits.append(RUN_A)
            run = (run - 1) // 2
        else:
            digits.append(RUN_B)
            run = (run - 2) // 2
    return digits


def _tokens_decode(tokens):
    out = []
    run = 0
    weight = 1
    for t in tokens:
        if t in (RUN_A, RUN_B):
            run += weight if t == RUN_A else 2 * weight
            weight *= 2
            continue
        if run:
            out.extend([0] * run)
            run = 0
            weight = 1
        out.append(t - 1)
    if run:
        out.extend([0] * run)
    return np.asarray(out, dtype=np.uint8)


# ---------------------------------------------------------------------------
# stage 5: canonical Huffman

def _huffman_lengths(freqs):
    import heapq
    items = [(f, i) for i, f in enumerate(freqs) if f > 0]
    if len(items) == 1:
        return {items[0][1]: 1}
    heap = [(f, i, None) for f, i in items]
    heapq.heapify(heap)
    counter = NUM_SYMBOLS
    nodes = {}
    while len(heap) > 1:
        f1, i1, c1 = heapq.heappop(heap)
        f2, i2, c2 = heapq.heappop(heap)
        nodes[counter] = (i1, i2)
        heapq.heappush(heap, (f1 + f2, counter, None))
        counter += 1
    lengths = {}

    def walk(node, depth):
        if node in nodes:
            a, b = nodes[node]
            walk(a, depth + 1)
            walk(b, depth + 1)
        else:
            lengths[node] = max(depth, 1)

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(10000)
    try:
        walk(heap[0][1], 0)
    finally:
        sys.setrecursionlimit(old)
    return lengths


def _canonical_codes(lengths):
    """Map {symbol: length} to {symbol: (code, length)}, canonical order."""
    codes = {}
    code = 0
    prev_len = 0
    for sym in sorted(lengths, key=lambda s: (lengths[s], s)):
        ln = lengths[sym]
        code <<= ln - prev_len
        codes[sym] = (code, ln)
        code += 1
        prev_len = ln
    return codes


def _pack_tokens(tokens, codes):
    code_arr = np.zeros(NUM_SYMBOLS, dtype=np.int64)
    len_arr = np.zeros(NUM_SYMBOLS, dtype=np.int64)
    for sym, (c, ln) in codes.items():
        code_arr[sym] = c
        len_arr[sym] = ln
    tl = len_arr[tokens]
    tc = code_arr[tokens]
    total = int(tl.sum())
    offsets = np.concatenate(([0], np.cumsum(tl)[:-1]))
    bits = np.zeros(total, dtype=np.uint8)
    maxlen = int(tl.max())
    for b in range(maxlen):
        sel = tl > b
        bits[offsets[sel] + b] = (tc[sel] >> (tl[sel] - 1 - b)) & 1
    return np.packbits(bits).tobytes(), total


def _unpack_tokens(payload, nbits, lengths, block_index):
    if nbits > 8 * len(payload):
        raise EntropyDecodeError("payload shorter than declared",
                                 block_index)
    codes = _canonical_codes(lengths)
    max_len = max(lengths.values())
    W = min(max_len, 12)
    # Primary lookup: next W bits -> (symbol, length) for short codes.
    lut = [None] * (1 << W)
    long_by_len = {}
    for sym, (c, ln) in codes.items():
        if ln <= W:
            base = c << (W - ln)
            entry = (sym, ln)
            for k in range(1 << (W - ln)):
                lut[base + k] = entry
        else:
            long_by_len.setdefault(ln, {})[c] = sym
    long_lens = sorted(long_by_len)
    tokens = []
    append = tokens.append
    acc = 0
    nacc = 0
    bytepos = 0
    consumed = 0
    data = payload
    ndata = len(data)
    while True:
        while nacc < 28 and bytepos < ndata:
            acc = (acc << 8) | data[bytepos]
            bytepos += 1
            nacc += 8
        if nacc <= 0:
            raise EntropyDecodeError("payload ended before end-of-block",
                                     block_index)
        look = (acc << (W - nacc)) if nacc < W else (acc >> (nacc - W))
        entry = lut[look & ((1 << W) - 1)]
        if entry is not None:
            sym, ln = entry
        else:
            sym = None
            for ln in long_lens:
                if ln > nacc:
                    break
                code = acc >> (nacc - ln)
                sym = long_by_len[ln].get(code)
                if sym is not None:
                    break
            if sym is None:
                raise EntropyDecodeError("invalid Huffman code", block_index)
        if ln > nacc or consumed + ln > nbits:
            raise EntropyDecodeError("payload ended before end-of-block",
                                     block_index)
        nacc -= ln
        acc &= (1 << nacc) - 1
        consumed += ln
        if sym == EOB:
            return tokens + [EOB]
        append(sym)


def _serialize_table(lengths):
    used = sorted(lengths)
    sparse = bytearray()
    sparse += len(used).to_bytes(2, "little")
    for sym in used:
        sparse += int(sym).to_bytes(2, "little")
        sparse.append(lengths[sym])
    dense = bytearray()
    for sym in range(NUM_SYMBOLS):
        dense.append(lengths.get(sym, 0))
    if len(sparse) <= len(dense):
        return bytes([0]) + bytes(sparse)
    return bytes([1]) + bytes(dense)


def _parse_table(data, pos, block_index):
    try:
        mode = data[pos]
        pos += 1
        lengths = {}
        if mode == 0:
            count = int.from_bytes(data[pos:pos + 2], "little")
            pos += 2
            for _ in range(count):
                sym = int.from_bytes(data[pos:pos + 2], "little")
                ln = data[pos + 2]
                pos += 3
                if sym >= NUM_SYMBOLS or ln == 0:
                    raise EntropyDecodeError("bad symbol table entry",
                                             block_index)
                lengths[sym] = ln
        elif mode == 1:
            for sym in range(NUM_SYMBOLS):
                ln = data[pos]
                pos += 1
                if ln:
                    lengths[sym] = ln
        else:
            raise EntropyDecodeError("unknown symbol table mode",
                                     block_index)
    except IndexError:
        raise EntropyDecodeError("truncated symbol table",
                                 block_index) from None
    if not lengths:
        raise EntropyDecodeError("empty symbol table", block_index)
    return lengths, pos


# ---------------------------------------------------------------------------
# public interface

def _encode_block(chunk):
    rle = _rle1_encode(chunk)
    bwt, index = _bwt_encode(rle)
    ranks = _mtf_encode(bwt)
    tokens = _tokens_encode(ranks)
    freqs = np.bincount(tokens, minlength=NUM_SYMBOLS)
    lengths = _huffman_lengths(freqs)
    codes = _canonical_codes(lengths)
    payload, nbits = _pack_tokens(tokens, codes)
    out = bytearray()
    out += len(chunk).to_bytes(4, "little")
    out += zlib.crc32(chunk).to_bytes(4, "little")
    out += int(index).to_bytes(4, "little")
    out += len(bwt).to_bytes(4, "little")
    out += _serialize_table(lengths)
    out += int(nbits).to_bytes(4, "little")
    out += payload
    return bytes(out)


def entropy_encode(data, block_size=DEFAULT_BLOCK_SIZE):
    """Compress a byte string; lossless for arbitrary input.

    Input longer than `block_size` is split into independent blocks.
    """
    data = bytes(data)
    out = bytearray(MAGIC)
    for start in range(0, len(data), block_size):
        out += _encode_block(data[start:start + block_size])
    return bytes(out)


def entropy_decode(data):
    """Inverse of :func:`entropy_encode`.

    Raises
    ------
    EntropyDecodeError
        On bad magic, truncation, malformed codes, or checksum mismatch;
        the error names the first bad block.
    """
    data = bytes(data)
    if data[:4] != MAGIC:
        raise EntropyDecodeError("bad entropy stream magic")
    pos = 4
    out = bytearray()
    block_index = 0
    while pos < len(data):
        try:
            raw_len = int.from_bytes(data[pos:pos + 4], "little")
            crc = int.from_bytes(data[pos + 4:pos + 8], "little")
            bwt_index = int.from_bytes(data[pos + 8:pos + 12], "little")
            bwt_len = int.from_bytes(data[pos + 12:pos + 16], "little")
            if pos + 16 > len(data):
                raise IndexError
            pos += 16
        except IndexError:
            raise EntropyDecodeError("truncated block header",
                                     block_index) from None
        lengths, pos = _parse_table(data, pos, block_index)
        if pos + 4 > len(data):
            raise EntropyDecodeError("truncated block", block_index)
        nbits = int.from_bytes(data[pos:pos + 4], "little")
        pos += 4
        nbytes = (nbits + 7) // 8
        payload = data[pos:pos + nbytes]
        if len(payload) < nbytes:
            raise EntropyDecodeError("truncated payload", block_index)
        pos += nbytes
        tokens = _unpack_tokens(payload, nbits, lengths, block_index)
        ranks = _tokens_decode(tokens[:-1])
        bwt = _mtf_decode(ranks)
        if len(bwt) != bwt_len:
            raise EntropyDecodeError("transform length mismatch",
                                     block_index)
        try:
            rle = _bwt_decode(bwt, bwt_index)
            chunk = _rle1_decode(rle)
        except ValueError as exc:
            raise EntropyDecodeError(str(exc), block_index) from None
        if len(chunk) != raw_len or zlib.crc32(chunk) != crc:
            raise EntropyDecodeError("block checksum mismatch", block_index)
        out += chunk
        block_index += 1
    return bytes(out)
