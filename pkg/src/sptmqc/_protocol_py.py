"""Pure-Python protocol sampler (fallback for the compiled kernel).

Both backends implement the same sequential Born-rule sampling and consume
uniforms from the same counter-based stream in the same order, so for a
given seed they produce identical traces.  Keep any behavioral change here
in lockstep with _protocol_kernel.pyx.
"""

import numpy as np

CHUNK = 1 << 16


class UniformStream:
    """Counter-based uniform stream; one draw per measured site."""

    def __init__(self, seed):
        self._rng = np.random.Generator(np.random.Philox(seed))
        self._buf = self._rng.random(CHUNK)
        self._pos = 0

    def take(self):
        if self._pos == CHUNK:
            self._buf = self._rng.random(CHUNK)
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v


def _sample_site(env, ops, stream):
    """Sample one site outcome and return (index, updated env, prob)."""
    posts = [op.conj().T @ env @ op for op in ops]
    probs = np.array([max(float(np.trace(p).real), 0.0) for p in posts])
    total = probs.sum()
    u = stream.take() * total
    acc = 0.0
    k = len(ops) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            k = i
            break
    post = posts[k]
    tr = probs[k]
    return k, post / tr, probs[k] / total


def sample_runs(site_ops, success_ops, lam, buffer_index, m, runs,
                max_attempts, seed, record=False):
    """Simulate ``runs`` independent protocol executions.

    Returns (attempts, succeeded, success_outcome, outcomes) where
    ``outcomes`` concatenates per-run chain-ordered outcome codes
    (length attempts * (2m + 1) per run) when ``record`` is set, else None.
    """
    site_ops = [np.asarray(op, dtype=complex) for op in site_ops]
    success_ops = [np.asarray(op, dtype=complex) for op in success_ops]
    d = len(site_ops)
    stream = UniformStream(seed)
    attempts_out = np.zeros(runs, dtype=np.int64)
    succeeded = np.zeros(runs, dtype=np.uint8)
    succ_outcome = np.full(runs, -1, dtype=np.int8)
    recorded = [] if record else None

    for run in range(runs):
        env = np.array(lam, dtype=complex)
        for attempt in range(1, max_attempts + 1):
            left = []
            all_buffered = True
            for _ in range(m):
                k, env, _ = _sample_site(env, site_ops, stream)
                left.append(k)
                all_buffered &= k == buffer_index
            env_pre = env
            # marginalize the (not yet measured) computational site
            env_marg = sum(op.conj().T @ env_pre @ op for op in site_ops)
            env_r = env_marg
            rights = []
            prod = np.eye(env.shape[0], dtype=complex)
            for _ in range(m):
                k, env_r, _ = _sample_site(env_r, site_ops, stream)
                rights.append(k)
                all_buffered &= k == buffer_index
                prod = prod @ site_ops[k]
            right_env = prod @ prod.conj().T
            ops = success_ops if all_buffered else site_ops
            weights = []
            for op in ops:
                post = op.conj().T @ env_pre @ op
                weights.append(max(float(np.trace(post @ right_env).real), 0.0))
            total = sum(weights)
            u = stream.take() * total
            acc = 0.0
            comp = len(ops) - 1
            for i, w in enumerate(weights):
                acc += w
                if u < acc:
                    comp = i
                    break
            if record:
                recorded.extend(left)
                recorded.append(comp if not all_buffered else d + comp)
                recorded.extend(rights)
            if all_buffered:
                attempts_out[run] = attempt
                succeeded[run] = 1
                succ_outcome[run] = comp
                break
            env = site_ops[comp].conj().T @ env_pre @ site_ops[comp]
            for k in rights:
                env = site_ops[k].conj().T @ env @ site_ops[k]
            tr = float(np.trace(env).real)
            env = env / tr
            env = 0.5 * (env + env.conj().T)
        else:
            attempts_out[run] = max_attempts
    outcomes = np.array(recorded, dtype=np.int16) if record else None
    return attempts_out, succeeded, succ_outcome, outcomes
