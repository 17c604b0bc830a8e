# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled run loops for the buffered and classical models.

Mirrors ``engine.step`` / ``classical.run_classical_python`` exactly,
including every tape position read.  Buffered messages are packed into one
int64: bit 0 kind (0 rumor, 1 request), bits 1-32 sender, bits 33-62 the
recipient-side port.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, uint8_t
from libc.stdlib cimport malloc, realloc, free, calloc
from libc.string cimport memcpy

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL

# tape purposes, as in tape.py
cdef enum:
    CONTACT = 1
    DIRECT = 2
    SHUFFLE = 3
    LATE_DIRECT = 4
    LATE_SHUFFLE = 5
    LATE_PUSH = 6

cdef enum:
    PUSH = 0
    PULL = 1
    PUSH_PULL = 2


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t absorb(uint64_t h, uint64_t x) noexcept nogil:
    return mix64((h ^ x) + GAMMA)


cdef inline int64_t pick(uint64_t seed, int64_t node, int64_t rnd, uint64_t purpose,
                         int64_t m, int64_t k) noexcept nogil:
    cdef uint64_t h = absorb(seed, purpose)
    h = absorb(h, <uint64_t>node)
    h = absorb(h, <uint64_t>rnd)
    h = absorb(h, <uint64_t>k)
    return <int64_t>(h % <uint64_t>m)


cdef inline int64_t msg_port(int64_t code) noexcept nogil:
    return code >> 33


cdef inline int64_t msg_sender(int64_t code) noexcept nogil:
    return (code >> 1) & 0xFFFFFFFFLL


cdef inline int64_t pack(int64_t kind, int64_t sender, int64_t port) noexcept nogil:
    return (port << 33) | (sender << 1) | kind


cdef struct Queue:
    int64_t* data
    int64_t cap
    int64_t head
    int64_t size


cdef int q_push(Queue* q, int64_t x) except -1 nogil:
    cdef int64_t newcap, i
    cdef int64_t* nd
    if q.size == q.cap:
        newcap = 8 if q.cap == 0 else q.cap * 2
        nd = <int64_t*>malloc(newcap * sizeof(int64_t))
        if nd == NULL:
            with gil:
                raise MemoryError()
        for i in range(q.size):
            nd[i] = q.data[(q.head + i) % q.cap]
        free(q.data)
        q.data = nd
        q.cap = newcap
        q.head = 0
    q.data[(q.head + q.size) % q.cap] = x
    q.size += 1
    return 0


cdef inline int64_t q_pop(Queue* q) noexcept nogil:
    cdef int64_t x = q.data[q.head]
    q.head = (q.head + 1) % q.cap
    q.size -= 1
    return x


cdef struct Column:
    int64_t* data
    int64_t size
    int64_t cap


cdef int col_push(Column* c, int64_t x) except -1 nogil:
    cdef int64_t* nd
    if c.size == c.cap:
        c.cap = 64 if c.cap == 0 else c.cap * 2
        nd = <int64_t*>realloc(c.data, c.cap * sizeof(int64_t))
        if nd == NULL:
            with gil:
                raise MemoryError()
        c.data = nd
    c.data[c.size] = x
    c.size += 1
    return 0


cdef object col_array(Column* c):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(c.size, dtype=np.int64)
    if c.size:
        memcpy(<void*>&out[0], c.data, c.size * sizeof(int64_t))
    return out


cdef void sort_by_port(int64_t* a, int64_t k) noexcept nogil:
    # insertion sort; groups usually arrive already ordered
    cdef int64_t i, j, x
    for i in range(1, k):
        x = a[i]
        j = i - 1
        while j >= 0 and msg_port(a[j]) > msg_port(x):
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = x


cdef void shuffle(int64_t* a, int64_t k, uint64_t seed, int64_t node, int64_t rnd,
                  uint64_t purpose) noexcept nogil:
    cdef int64_t i, j, t
    i = k - 1
    while i > 0:
        j = pick(seed, node, rnd, purpose, i + 1, i)
        t = a[i]
        a[i] = a[j]
        a[j] = t
        i -= 1


cdef int64_t group(int64_t n, int64_t* tgt, int64_t* code, int64_t* cnt, int64_t* start,
                   int64_t* out) noexcept nogil:
    """Counting-sort the per-sender messages by recipient (stable in sender id)."""
    cdef int64_t v, total = 0, r
    for v in range(n + 1):
        cnt[v] = 0
    for v in range(n):
        if tgt[v] >= 0:
            cnt[tgt[v]] += 1
    for v in range(n):
        start[v] = total
        total += cnt[v]
    start[n] = total
    for v in range(n):
        cnt[v] = start[v]
    for v in range(n):
        r = tgt[v]
        if r >= 0:
            out[cnt[r]] = code[v]
            cnt[r] += 1
    return total


def run_buffered(const int64_t[::1] indptr, const int64_t[::1] nbrs, const int64_t[::1] rev,
                 int64_t source, int protocol, int tie_break, int64_t capacity,
                 int64_t max_rounds, uint64_t seed):
    cdef int64_t n = indptr.shape[0] - 1
    cdef int64_t v, r, p, u, k, j, i, code, rnd = 0, completion = -1
    cdef int64_t informed_count = 1, nearly, max_buf, buffered = 0
    cdef int64_t sent = 0, reads = 0, dropped = 0
    cdef bint informed_start, answered

    cdef cnp.ndarray[int64_t, ndim=1] informed_round_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] ir = informed_round_arr
    cdef Queue* q = <Queue*>calloc(n, sizeof(Queue))
    cdef int64_t* rumors = <int64_t*>calloc(n, sizeof(int64_t))
    cdef uint8_t* did_read = <uint8_t*>calloc(n, sizeof(uint8_t))
    cdef int64_t* tgt = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* code_of = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* direct = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* cnt = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* start = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t* arr = <int64_t*>malloc((n + 1) * sizeof(int64_t))
    cdef Column c_inf, c_near, c_buf, c_max
    c_inf.data = c_near.data = c_buf.data = c_max.data = NULL
    c_inf.size = c_near.size = c_buf.size = c_max.size = 0
    c_inf.cap = c_near.cap = c_buf.cap = c_max.cap = 0

    if (q == NULL or rumors == NULL or did_read == NULL or tgt == NULL or code_of == NULL
            or direct == NULL or cnt == NULL or start == NULL or arr == NULL):
        raise MemoryError()
    try:
        ir[source] = 0
        if n == 1:
            completion = 0
        while completion < 0 and rnd < max_rounds:
            rnd += 1
            # phase A
            for v in range(n):
                did_read[v] = 0
                direct[v] = -1
                tgt[v] = -1
                informed_start = ir[v] >= 0
                if informed_start:
                    if protocol != PUSH:
                        continue
                else:
                    if protocol == PUSH:
                        continue
                k = indptr[v + 1] - indptr[v]
                p = pick(seed, v, rnd, CONTACT, k, 0)
                tgt[v] = nbrs[indptr[v] + p]
                code_of[v] = pack(0 if informed_start else 1, v, rev[indptr[v] + p])
                sent += 1
            # phase B
            group(n, tgt, code_of, cnt, start, arr)
            for r in range(n):
                k = start[r + 1] - start[r]
                if k == 0:
                    continue
                i = start[r]
                sort_by_port(&arr[i], k)
                if q[r].size == 0:
                    j = 0 if k == 1 else pick(seed, r, rnd, DIRECT, k, 0)
                    direct[r] = arr[i + j]
                    while j < k - 1:
                        arr[i + j] = arr[i + j + 1]
                        j += 1
                    k -= 1
                if tie_break == 0:
                    shuffle(&arr[i], k, seed, r, rnd, SHUFFLE)
                for j in range(k):
                    code = arr[i + j]
                    if capacity >= 0 and q[r].size >= capacity:
                        dropped += 1
                        continue
                    q_push(&q[r], code)
                    buffered += 1
                    if (code & 1) == 0:
                        rumors[r] += 1
            # phase C
            for v in range(n):
                informed_start = ir[v] >= 0
                tgt[v] = -1
                code = direct[v]
                if code < 0 and q[v].size > 0:
                    code = q_pop(&q[v])
                    buffered -= 1
                    if (code & 1) == 0:
                        rumors[v] -= 1
                answered = False
                if code >= 0:
                    did_read[v] = 1
                    reads += 1
                    if (code & 1) == 0:
                        if not informed_start:
                            ir[v] = rnd
                            informed_count += 1
                    elif informed_start:
                        p = msg_port(code)
                        tgt[v] = msg_sender(code)
                        code_of[v] = pack(0, v, rev[indptr[v] + p])
                        sent += 1
                        answered = True
                if protocol == PUSH_PULL and informed_start and not answered:
                    k = indptr[v + 1] - indptr[v]
                    p = pick(seed, v, rnd, LATE_PUSH, k, 0)
                    tgt[v] = nbrs[indptr[v] + p]
                    code_of[v] = pack(0, v, rev[indptr[v] + p])
                    sent += 1
            # phase D
            group(n, tgt, code_of, cnt, start, arr)
            for r in range(n):
                k = start[r + 1] - start[r]
                if k == 0:
                    continue
                i = start[r]
                sort_by_port(&arr[i], k)
                if did_read[r] == 0 and q[r].size == 0:
                    j = 0 if k == 1 else pick(seed, r, rnd, LATE_DIRECT, k, 0)
                    code = arr[i + j]
                    while j < k - 1:
                        arr[i + j] = arr[i + j + 1]
                        j += 1
                    k -= 1
                    did_read[r] = 1
                    reads += 1
                    if ir[r] < 0:
                        ir[r] = rnd
                        informed_count += 1
                if tie_break == 0:
                    shuffle(&arr[i], k, seed, r, rnd, LATE_SHUFFLE)
                for j in range(k):
                    code = arr[i + j]
                    if capacity >= 0 and q[r].size >= capacity:
                        dropped += 1
                        continue
                    q_push(&q[r], code)
                    buffered += 1
                    rumors[r] += 1
            # record
            nearly = 0
            max_buf = 0
            for v in range(n):
                if ir[v] < 0 and rumors[v] > 0:
                    nearly += 1
                if q[v].size > max_buf:
                    max_buf = q[v].size
            col_push(&c_inf, informed_count)
            col_push(&c_near, nearly)
            col_push(&c_buf, buffered)
            col_push(&c_max, max_buf)
            if informed_count == n:
                completion = rnd
        return (informed_round_arr, col_array(&c_inf), col_array(&c_near), col_array(&c_buf),
                col_array(&c_max), completion, sent, reads, dropped, buffered)
    finally:
        for v in range(n):
            free(q[v].data)
        free(q)
        free(rumors)
        free(did_read)
        free(tgt)
        free(code_of)
        free(direct)
        free(cnt)
        free(start)
        free(arr)
        free(c_inf.data)
        free(c_near.data)
        free(c_buf.data)
        free(c_max.data)


def run_classical(const int64_t[::1] indptr, const int64_t[::1] nbrs, int64_t source,
                  int protocol, int64_t max_rounds, uint64_t seed):
    cdef int64_t n = indptr.shape[0] - 1
    cdef int64_t v, u, k, rnd = 0, completion = -1, count = 1, sent = 0
    cdef bint push = protocol == PUSH or protocol == PUSH_PULL
    cdef bint pull = protocol == PULL or protocol == PUSH_PULL
    cdef bint vs, us
    cdef cnp.ndarray[int64_t, ndim=1] informed_round_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] ir = informed_round_arr
    cdef Column c_inf
    c_inf.data = NULL
    c_inf.size = c_inf.cap = 0
    try:
        ir[source] = 0
        if n == 1:
            completion = 0
        while completion < 0 and rnd < max_rounds:
            rnd += 1
            for v in range(n):
                # informed at the start of this round: 0 <= ir < rnd
                vs = 0 <= ir[v] < rnd
                if (vs and not push) or (not vs and not pull):
                    continue
                k = indptr[v + 1] - indptr[v]
                u = nbrs[indptr[v] + pick(seed, v, rnd, CONTACT, k, 0)]
                sent += 1
                us = 0 <= ir[u] < rnd
                if vs:
                    if ir[u] < 0:
                        ir[u] = rnd
                        count += 1
                elif us:
                    sent += 1
                    if ir[v] < 0:
                        ir[v] = rnd
                        count += 1
            col_push(&c_inf, count)
            if count == n:
                completion = rnd
        zeros = np.zeros(c_inf.size, dtype=np.int64)
        return (informed_round_arr, col_array(&c_inf), zeros, zeros.copy(), zeros.copy(),
                completion, sent, sent, 0, 0)
    finally:
        free(c_inf.data)
