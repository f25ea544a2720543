"""Brute-force reference implementations, written against frozensets of labels
and sharing no code with the package."""

from __future__ import annotations

import itertools
import math

import numpy as np


def powerset(labels):
    return [frozenset(c) for r in range(len(labels) + 1) for c in itertools.combinations(labels, r)]


def conjunctive(*ms):
    """Literal n-fold sum over every tuple of focal sets."""
    out = {}
    for combo in itertools.product(*(m.items() for m in ms)):
        inter = frozenset.intersection(*(s for s, _ in combo))
        out[inter] = out.get(inter, 0.0) + math.prod(v for _, v in combo)
    return out


def dempster(*ms):
    raw = conjunctive(*ms)
    k = raw.pop(frozenset(), 0.0)
    return {s: v / (1.0 - k) for s, v in raw.items()}


def pignistic(m, labels):
    empty = m.get(frozenset(), 0.0)
    return [sum(v / len(s) for s, v in m.items() if lab in s) / (1.0 - empty) for lab in labels]


def jousselme(m1, m2, labels):
    sets = powerset(labels)
    d = np.array([[1.0 if not a and not b else len(a & b) / len(a | b) if a | b else 0.0 for b in sets] for a in sets])
    diff = np.array([m1.get(s, 0.0) - m2.get(s, 0.0) for s in sets])
    return math.sqrt(max(0.0, 0.5 * diff @ d @ diff))


def discount(m, alpha, labels):
    omega = frozenset(labels)
    out = {s: alpha * v for s, v in m.items() if s != omega}
    out[omega] = 1.0 - alpha * (1.0 - m.get(omega, 0.0))
    return out


def gamma(card, imp_max, frame_size):
    lx, li, lo = math.log(card), math.log(imp_max), math.log(frame_size)
    return (lo / li) * (li - lx) / (lo - lx)


def dawid_skene_loglik(posterior_init, counts, iterations):
    """Plain-loop Dawid-Skene on dense counts ``(Q, C, L)``; returns log-likelihoods."""
    nq, nc, nl = counts.shape
    post = posterior_init.copy()
    lls = []
    for _ in range(iterations):
        priors = post.mean(axis=0)
        conf = np.zeros((nc, nl, nl))
        for q in range(nq):
            for c in range(nc):
                for k in range(nl):
                    conf[c, k] += post[q, k] * counts[q, c]
        for c in range(nc):
            for k in range(nl):
                s = conf[c, k].sum()
                conf[c, k] = conf[c, k] / s if s > 0 else 1.0 / nl
        ll = 0.0
        for q in range(nq):
            joint = np.array([
                math.log(priors[k]) + sum(
                    counts[q, c, l] * math.log(conf[c, k, l]) for c in range(nc) for l in range(nl)
                    if counts[q, c, l] > 0)
                for k in range(nl)])
            top = joint.max()
            z = np.exp(joint - top).sum()
            post[q] = np.exp(joint - top) / z
            ll += top + math.log(z)
        lls.append(ll)
    return lls, post
