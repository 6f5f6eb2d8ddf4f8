"""Versioned text checkpoints for layer stacks.

A checkpoint is a single text document: the layer list, a flat
key = value configuration snapshot, and every named parameter as a
shape line plus decimal values. Floats are written with repr(), whose
shortest round-trip form is lossless at up to 17 significant digits.
"""

import numpy as np

from .errors import CheckpointError
from .layers import Affine, GroupMixNorm, LayerStack, SigmoidOutput, SiLU

FORMAT_HEADER = "fairnorm-checkpoint v1"


def _layer_line(layer):
    spec = layer.spec()
    if spec.kind == "affine":
        return f"affine {spec.in_dim} {spec.out_dim}"
    if spec.kind == "groupmixnorm":
        cfg = layer.config
        return f"groupmixnorm {spec.in_dim} alpha={cfg.alpha!r} epsilon={cfg.epsilon!r}"
    return f"{spec.kind} {spec.in_dim}"


def save(stack, config, path):
    """Write the stack and a flat config mapping to path."""
    lines = [FORMAT_HEADER, "[layers]"]
    lines.extend(_layer_line(layer) for layer in stack.layers)
    lines.append("[config]")
    for key in sorted(config):
        value = str(config[key])
        if "\n" in value:
            raise CheckpointError(f"config value for {key!r} contains a newline")
        lines.append(f"{key} = {value}")
    for name, value, _ in stack.named_parameters():
        lines.append(f"[param {name}]")
        lines.append("shape " + " ".join(str(d) for d in value.shape))
        rows = value.reshape(value.shape[0], -1) if value.ndim == 2 else value.reshape(1, -1)
        for row in rows:
            lines.append(" ".join(repr(float(x)) for x in row))
    lines.append("[end]")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _build_layer(line):
    parts = line.split()
    kind = parts[0]
    try:
        if kind == "affine":
            return Affine(int(parts[1]), int(parts[2]))
        if kind == "silu":
            return SiLU(int(parts[1]))
        if kind == "sigmoid-output":
            return SigmoidOutput(int(parts[1]))
        if kind == "groupmixnorm":
            dim = int(parts[1])
            kv = dict(p.split("=", 1) for p in parts[2:])
            return GroupMixNorm(
                dim, alpha=float(kv["alpha"]), epsilon=float(kv["epsilon"])
            )
    except (IndexError, KeyError, ValueError) as exc:
        raise CheckpointError(f"bad layer line {line!r}: {exc}") from None
    raise CheckpointError(f"unknown layer kind {kind!r}")


def load(path):
    """Read a checkpoint; returns (stack, config dict)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    if not lines or lines[0] != FORMAT_HEADER:
        raise CheckpointError(
            f"{path}: not a {FORMAT_HEADER!r} file"
        )
    sections = {}
    current = None
    for line in lines[1:]:
        if not line.strip():
            continue
        if line.startswith("["):
            current = line.strip("[]")
            sections[current] = []
        elif current is None:
            raise CheckpointError(f"{path}: content before first section")
        else:
            sections[current].append(line)
    if "layers" not in sections or "end" not in sections:
        raise CheckpointError(f"{path}: missing layers section or end marker")

    stack = LayerStack([_build_layer(line) for line in sections["layers"]])

    config = {}
    for line in sections.get("config", []):
        if " = " not in line:
            raise CheckpointError(f"{path}: bad config line {line!r}")
        key, value = line.split(" = ", 1)
        config[key] = value

    params = dict((name, (value, name)) for name, value, _ in stack.named_parameters())
    seen = set()
    for section, body in sections.items():
        if not section.startswith("param "):
            continue
        name = section[len("param ") :]
        if name not in params:
            raise CheckpointError(f"{path}: unexpected parameter {name!r}")
        target = params[name][0]
        if not body or not body[0].startswith("shape "):
            raise CheckpointError(f"{path}: parameter {name!r} lacks a shape line")
        shape = tuple(int(d) for d in body[0].split()[1:])
        if shape != target.shape:
            raise CheckpointError(
                f"{path}: parameter {name!r} shape {shape} != expected {target.shape}"
            )
        try:
            values = np.array(
                [[float(x) for x in line.split()] for line in body[1:]]
            )
        except ValueError as exc:
            raise CheckpointError(f"{path}: parameter {name!r}: {exc}") from None
        if values.size != target.size:
            raise CheckpointError(
                f"{path}: parameter {name!r} has {values.size} values, "
                f"expected {target.size}"
            )
        target[...] = values.reshape(target.shape)
        seen.add(name)
    missing = set(params) - seen
    if missing:
        raise CheckpointError(f"{path}: missing parameters {sorted(missing)}")
    return stack, config
