"""Adam over a registry of named parameter arrays."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass
class _Slot:
    value: np.ndarray
    grad: np.ndarray
    m: np.ndarray
    v: np.ndarray


class ParamSet:
    """Named parameters with matching gradient buffers and moment state.

    Value and gradient arrays are shared by reference with the layers
    that own them, so in-place updates here are visible to the stack.
    Single writer: one training loop mutates a ParamSet at a time.
    """

    def __init__(self):
        self._slots = {}
        self.step_count = 0

    def register(self, name, value, grad):
        if name in self._slots:
            raise ValueError(f"duplicate parameter name {name!r}")
        if value.shape != grad.shape:
            raise ShapeError(
                f"{name}: grad shape {grad.shape} != value shape {value.shape}"
            )
        self._slots[name] = _Slot(value, grad, np.zeros_like(value), np.zeros_like(value))

    def names(self):
        return list(self._slots)

    def value(self, name):
        return self._slots[name].value

    def grad(self, name):
        return self._slots[name].grad

    def zero_grads(self):
        for slot in self._slots.values():
            slot.grad[...] = 0.0

    def n_parameters(self):
        return sum(slot.value.size for slot in self._slots.values())

    def copy_values(self):
        return {name: slot.value.copy() for name, slot in self._slots.items()}

    def load_values(self, values):
        if set(values) != set(self._slots):
            raise ShapeError("parameter names do not match this ParamSet")
        for name, arr in values.items():
            slot = self._slots[name]
            if arr.shape != slot.value.shape:
                raise ShapeError(f"{name}: shape {arr.shape} != {slot.value.shape}")
            slot.value[...] = arr

    def _items(self):
        return self._slots.items()


def adam_step(params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update; zeroes every gradient afterwards."""
    params.step_count += 1
    t = params.step_count
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for _, slot in params._items():
        g = slot.grad
        slot.m *= beta1
        slot.m += (1.0 - beta1) * g
        slot.v *= beta2
        slot.v += (1.0 - beta2) * g * g
        slot.value -= lr * (slot.m / c1) / (np.sqrt(slot.v / c2) + eps)
        g[...] = 0.0
    return params
