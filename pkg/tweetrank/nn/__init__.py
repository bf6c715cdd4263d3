from .tensor import Tensor, Tape
from . import functional
from .optim import SgdConfig, sgd_step
from .gradcheck import gradcheck, numerical_gradient
