from . import ops
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint
from .gradcheck import grad_check, relative_error
from .init import make_rng, xavier_uniform_init
from .optim import AdamState, adam_step, clip_global_norm, global_norm
from .tape import Node, Tape, backward, grads_by_name

__all__ = [
    "AdamState", "FORMAT_VERSION", "Node", "Tape", "adam_step", "backward", "clip_global_norm",
    "global_norm", "grad_check", "grads_by_name", "load_checkpoint", "make_rng", "ops",
    "relative_error", "save_checkpoint", "xavier_uniform_init",
]
