# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled protocol sampler.

Mirrors _protocol_py.sample_runs exactly: same Born-rule sampling, same
uniform-stream consumption order, so both backends produce identical traces
for a given seed.  Keep the two implementations in lockstep.
"""

import numpy as np

DEF MAXD = 8
DEF MAXOPS = 8
DEF MAXM = 64

CHUNK = 65536


cdef class _Stream:
    """Counter-based uniform stream; one draw per measured site."""
    cdef object rng
    cdef double[::1] buf
    cdef long pos

    def __init__(self, seed):
        self.rng = np.random.Generator(np.random.Philox(seed))
        self.buf = self.rng.random(CHUNK)
        self.pos = 0

    cdef double take(self):
        cdef double v
        if self.pos == CHUNK:
            self.buf = self.rng.random(CHUNK)
            self.pos = 0
        v = self.buf[self.pos]
        self.pos += 1
        return v


cdef inline void _mul(double complex* out, double complex* a, double complex* b, int n) noexcept:
    # out = a @ b
    cdef int i, j, k
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[i * n + k] * b[k * n + j]
            out[i * n + j] = acc


cdef inline void _conjT_mul(double complex* out, double complex* a, double complex* b, int n) noexcept:
    # out = a^dag @ b
    cdef int i, j, k
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[k * n + i].conjugate() * b[k * n + j]
            out[i * n + j] = acc


cdef inline double _trace_re(double complex* a, int n) noexcept:
    cdef int i
    cdef double acc = 0.0
    for i in range(n):
        acc += a[i * n + i].real
    return acc


cdef inline double _trace_prod_re(double complex* a, double complex* b, int n) noexcept:
    # Re tr(a @ b)
    cdef int i, j
    cdef double complex acc = 0
    for i in range(n):
        for j in range(n):
            acc = acc + a[i * n + j] * b[j * n + i]
    return acc.real


cdef int _site(double complex* env, double complex* ops, int nops, int D,
               double complex* post, double complex* tmp, double* probs,
               _Stream stream):
    """Sample one site in the measurement basis ``ops``; update env in place."""
    cdef int k, i, sel
    cdef double total = 0.0, u, acc, tr
    for k in range(nops):
        _conjT_mul(tmp, ops + k * D * D, env, D)
        _mul(post + k * D * D, tmp, ops + k * D * D, D)
        probs[k] = _trace_re(post + k * D * D, D)
        if probs[k] < 0.0:
            probs[k] = 0.0
        total += probs[k]
    u = stream.take() * total
    acc = 0.0
    sel = nops - 1
    for k in range(nops):
        acc += probs[k]
        if u < acc:
            sel = k
            break
    tr = probs[sel]
    for i in range(D * D):
        env[i] = post[sel * D * D + i] / tr
    return sel


def sample_runs(site_ops, success_ops, lam, int buffer_index, int m, long runs,
                long max_attempts, seed, bint record=False):
    """See _protocol_py.sample_runs; identical contract."""
    a_arr = np.array(np.stack(site_ops), dtype=np.complex128, order="C")
    s_arr = np.array(np.stack(success_ops), dtype=np.complex128, order="C")
    lam_arr = np.array(lam, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, :, ::1] A = a_arr
    cdef double complex[:, :, ::1] S = s_arr
    cdef double complex[:, ::1] LAM = lam_arr
    cdef int d = A.shape[0]
    cdef int ns = S.shape[0]
    cdef int D = A.shape[1]
    if D > MAXD or d > MAXOPS or ns > MAXOPS:
        raise ValueError("bond or physical dimension exceeds the compiled limit")
    if m > MAXM:
        raise ValueError("buffer depth exceeds the compiled limit of 64")

    cdef _Stream stream = _Stream(seed)

    attempts_np = np.zeros(runs, dtype=np.int64)
    succeeded_np = np.zeros(runs, dtype=np.uint8)
    succ_outcome_np = np.full(runs, -1, dtype=np.int8)
    cdef long[::1] attempts = attempts_np
    cdef unsigned char[::1] succeeded = succeeded_np
    cdef signed char[::1] succ_outcome = succ_outcome_np

    cdef long rec_cap = 0
    outcomes_np = None
    cdef short[::1] outcomes = None
    if record:
        rec_cap = 4096
        outcomes_np = np.zeros(rec_cap, dtype=np.int16)
        outcomes = outcomes_np
    cdef long rec_pos = 0

    cdef double complex env[MAXD * MAXD]
    cdef double complex env_pre[MAXD * MAXD]
    cdef double complex env_r[MAXD * MAXD]
    cdef double complex tmp[MAXD * MAXD]
    cdef double complex post[MAXOPS * MAXD * MAXD]
    cdef double complex prod[MAXD * MAXD]
    cdef double complex renv[MAXD * MAXD]
    cdef double complex opbuf[MAXD * MAXD]
    cdef double probs[MAXOPS]
    cdef int left[MAXM]
    cdef int rights[MAXM]

    cdef long run, attempt
    cdef int i, j, k, sel, nops, all_buffered
    cdef double total, u, acc, tr
    cdef double complex cacc

    for run in range(runs):
        for i in range(D * D):
            env[i] = LAM[i // D, i % D]
        for attempt in range(1, max_attempts + 1):
            all_buffered = 1
            for j in range(m):
                sel = _site(env, &A[0, 0, 0], d, D, post, tmp, probs, stream)
                left[j] = sel
                if sel != buffer_index:
                    all_buffered = 0
            for i in range(D * D):
                env_pre[i] = env[i]
            # marginalize the (not yet measured) computational site
            for i in range(D * D):
                env_r[i] = 0
            for k in range(d):
                _conjT_mul(tmp, &A[k, 0, 0], env_pre, D)
                _mul(opbuf, tmp, &A[k, 0, 0], D)
                for i in range(D * D):
                    env_r[i] = env_r[i] + opbuf[i]
            # right buffer sites, accumulating the outcome operator product
            for i in range(D):
                for j in range(D):
                    prod[i * D + j] = 1 if i == j else 0
            for j in range(m):
                sel = _site(env_r, &A[0, 0, 0], d, D, post, tmp, probs, stream)
                rights[j] = sel
                if sel != buffer_index:
                    all_buffered = 0
                _mul(tmp, prod, &A[sel, 0, 0], D)
                for i in range(D * D):
                    prod[i] = tmp[i]
            for i in range(D):
                for j in range(D):
                    cacc = 0
                    for k in range(D):
                        cacc = cacc + prod[i * D + k] * prod[j * D + k].conjugate()
                    renv[i * D + j] = cacc
            # computational site, conditioned on both sides
            nops = ns if all_buffered else d
            total = 0.0
            for k in range(nops):
                if all_buffered:
                    _conjT_mul(tmp, &S[k, 0, 0], env_pre, D)
                    _mul(opbuf, tmp, &S[k, 0, 0], D)
                else:
                    _conjT_mul(tmp, &A[k, 0, 0], env_pre, D)
                    _mul(opbuf, tmp, &A[k, 0, 0], D)
                probs[k] = _trace_prod_re(opbuf, renv, D)
                if probs[k] < 0.0:
                    probs[k] = 0.0
                for i in range(D * D):
                    post[k * D * D + i] = opbuf[i]
                total += probs[k]
            u = stream.take() * total
            acc = 0.0
            sel = nops - 1
            for k in range(nops):
                acc += probs[k]
                if u < acc:
                    sel = k
                    break
            if record:
                if rec_pos + 2 * m + 1 > rec_cap:
                    while rec_pos + 2 * m + 1 > rec_cap:
                        rec_cap *= 2
                    if rec_cap > 200_000_000:
                        raise ValueError("outcome record exceeds the memory cap")
                    outcomes_np = np.resize(outcomes_np, rec_cap)
                    outcomes = outcomes_np
                for j in range(m):
                    outcomes[rec_pos] = left[j]
                    rec_pos += 1
                outcomes[rec_pos] = (d + sel) if all_buffered else sel
                rec_pos += 1
                for j in range(m):
                    outcomes[rec_pos] = rights[j]
                    rec_pos += 1
            if all_buffered:
                attempts[run] = attempt
                succeeded[run] = 1
                succ_outcome[run] = <signed char> sel
                break
            # advance the environment past this attempt's region
            _conjT_mul(tmp, &A[sel, 0, 0], env_pre, D)
            _mul(env, tmp, &A[sel, 0, 0], D)
            for j in range(m):
                k = rights[j]
                _conjT_mul(tmp, &A[k, 0, 0], env, D)
                _mul(env, tmp, &A[k, 0, 0], D)
            tr = _trace_re(env, D)
            for i in range(D * D):
                env[i] = env[i] / tr
            for i in range(D):
                for j in range(D):
                    tmp[i * D + j] = 0.5 * (env[i * D + j] + env[j * D + i].conjugate())
            for i in range(D * D):
                env[i] = tmp[i]
            if attempt == max_attempts:
                attempts[run] = max_attempts

    if record:
        outcomes_np = outcomes_np[:rec_pos]
    return attempts_np, succeeded_np, succ_outcome_np, outcomes_np
