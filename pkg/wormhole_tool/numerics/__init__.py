__author__ = 'wormhole-tool developers'

from .grid import (UniformGrid, StencilSet, fd_derivative, fornberg_weights, interpolation_weights,
                   ko_dissipation, quadrature, quadrature_adaptive)
from .integrate import OdeSampler, bisect_root, integrate_ode_adaptive, rk4_step
from .series import ShanksResult, shanks_accelerate
