"""Finite-outcome instruments and their probability measures.

An instrument assigns one operation to each outcome label; the summed
operation must be trivial (unital and trace preserving), so the outcome
probabilities from any nonzero condition form an exact, finitely additive
probability measure on subsets of the outcome set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from types import MappingProxyType

import numpy as np

from .errors import DimensionMismatch, NotOperation, NotTrivialSum, ValidationError, ZeroCondition
from .matcore import DEFAULT_TOL
from .superop import Superoperator, add, adjoint, apply, classify, compose, zero
from . import bayes

__all__ = [
    "Instrument",
    "SUM_TOL",
    "make_instrument",
    "product",
    "summed",
    "p_inst_pred",
    "p_inst_retro",
    "p_inst",
    "p_cond_pred",
    "p_cond_retro",
]

#: Absolute tolerance on ``|sum(I) - I|`` for the trivial-sum validation;
#: looser than the arithmetic tolerance because sums accumulate error over
#: many components.
SUM_TOL = 1e-8


@dataclass(frozen=True)
class Instrument:
    """Ordered outcome labels with one operation per label, validated at build time."""

    name: str
    dim: int
    outcomes: tuple
    ops: MappingProxyType = field(repr=False)

    def op(self, label: str) -> Superoperator:
        try:
            return self.ops[label]
        except KeyError:
            raise ValidationError(f"instrument '{self.name}' has no outcome '{label}'") from None


def make_instrument(ops, name: str = "", tol: float = DEFAULT_TOL, sum_tol: float = SUM_TOL) -> Instrument:
    """Validate and build an instrument from a label-to-operation mapping.

    Every component must be an operation and the components must sum to a
    trivial map within ``sum_tol``; otherwise :class:`NotOperation` or
    :class:`NotTrivialSum` is raised.
    """
    if not ops:
        raise ValidationError(f"instrument '{name}': outcome map must be nonempty")
    labels = tuple(ops)
    dims = {a.dim for a in ops.values()}
    if len(dims) != 1:
        raise DimensionMismatch(f"instrument '{name}': components have mixed dims {sorted(dims)}")
    dim = dims.pop()
    for label in labels:
        if not classify(ops[label], tol).operation:
            raise NotOperation(f"instrument '{name}': component '{label}' is not an operation")
    total = reduce(add, ops.values())
    eye = np.eye(dim)
    dev_out = float(np.abs(apply(total, eye) - eye).max())
    dev_in = float(np.abs(apply(adjoint(total), eye) - eye).max())
    if dev_out > sum_tol or dev_in > sum_tol:
        raise NotTrivialSum(
            f"instrument '{name}': component sum is not trivial; "
            f"|sum(I) - I| = {dev_out:.3e}, |adjoint(sum)(I) - I| = {dev_in:.3e}"
        )
    return Instrument(name, dim, labels, MappingProxyType(dict(ops)))


def product(i: Instrument, j: Instrument, tol: float = DEFAULT_TOL) -> Instrument:
    """Joint instrument on the Cartesian outcome set.

    The component at ``"x,y"`` is ``compose(i.op(x), j.op(y))`` -- ``j`` acts
    first, ``i`` second -- and the result revalidates as an instrument.
    """
    if i.dim != j.dim:
        raise DimensionMismatch(f"instrument dims differ: {i.dim} vs {j.dim}")
    ops = {
        f"{x},{y}": compose(i.op(x), j.op(y))
        for x in i.outcomes
        for y in j.outcomes
    }
    name = f"{i.name}*{j.name}" if i.name or j.name else ""
    return make_instrument(ops, name=name, tol=tol)


def _event_labels(i: Instrument, event) -> tuple:
    labels = tuple(event)
    unknown = [x for x in labels if x not in i.ops]
    if unknown:
        raise ValidationError(f"instrument '{i.name}' has no outcomes {unknown}")
    return labels


def summed(i: Instrument, event) -> Superoperator:
    """Sum of the components over an outcome subset (zero map for the empty set)."""
    labels = _event_labels(i, event)
    if not labels:
        return zero(i.dim)
    return reduce(add, (i.op(x) for x in labels))


def p_inst_pred(i: Instrument, event, a: Superoperator, tol: float = DEFAULT_TOL) -> float:
    """Predictive probability that the outcome lands in ``event``, given ``a`` just fired."""
    return bayes.p_pred(summed(i, event), a, tol, check=True)


def p_inst_retro(i: Instrument, event, a: Superoperator, tol: float = DEFAULT_TOL) -> float:
    """Retrodictive probability that the outcome lands in ``event``, given ``a`` fires next."""
    return bayes.p_retro(summed(i, event), a, tol, check=True)


def p_inst(i: Instrument, event, tol: float = DEFAULT_TOL) -> float:
    """Unconditional probability of ``event`` from the maximally mixed prior."""
    return bayes.p_prior(summed(i, event), tol, check=True)


def p_cond_pred(i: Instrument, j: Instrument, a_event, b_event, tol: float = DEFAULT_TOL) -> float:
    """Probability that ``i`` lands in ``a_event`` after ``j`` landed in ``b_event``.

    Defined as the joint probability of ``a_event x b_event`` under the
    product instrument (``j`` first), divided by the probability of
    ``b_event`` under ``j``.
    """
    pj = p_inst(j, b_event, tol)
    if pj <= tol:
        raise ZeroCondition("conditioning event has zero probability")
    labels_a = _event_labels(i, a_event)
    labels_b = _event_labels(j, b_event)
    joint = zero(i.dim)
    for x in labels_a:
        for y in labels_b:
            joint = add(joint, compose(i.op(x), j.op(y)))
    return bayes._as_probability(complex(bayes.p_prior(joint, tol, check=False) / pj), tol)


def p_cond_retro(i: Instrument, j: Instrument, a_event, b_event, tol: float = DEFAULT_TOL) -> float:
    """Probability that ``i`` landed in ``a_event`` before ``j`` lands in ``b_event``.

    The mirrored form: joint probability under the product with ``i`` first,
    divided by the probability of ``b_event`` under ``j``.
    """
    pj = p_inst(j, b_event, tol)
    if pj <= tol:
        raise ZeroCondition("conditioning event has zero probability")
    labels_a = _event_labels(i, a_event)
    labels_b = _event_labels(j, b_event)
    joint = zero(i.dim)
    for x in labels_a:
        for y in labels_b:
            joint = add(joint, compose(j.op(y), i.op(x)))
    return bayes._as_probability(complex(bayes.p_prior(joint, tol, check=False) / pj), tol)
