import pytest

from dispel.cell_library import CellDims, build_library
from dispel.design_flow import generate_netlist
from dispel.interconnect import default_stack
from dispel.sweep import DevicePair
from dispel.vsdevice import VSParams, tune_vt

V_DD = 0.7


def mos2_params(**over):
    base = dict(polarity="n", v=1.17e7, mu=200.0, l_gate=10.0, c_inv=4.36,
                ss=70.0, v_t0=0.25, dibl=0.1, beta=1.8)
    base.update(over)
    return VSParams(**base)


def bp_params(**over):
    base = dict(polarity="p", v=1.7e7, mu=350.0, l_gate=10.0, c_inv=4.26,
                ss=70.0, v_t0=0.25, dibl=0.1, beta=1.8)
    base.update(over)
    return VSParams(**base)


def finfet_params(polarity="n", **over):
    base = dict(polarity=polarity, v=0.97e7, mu=253.0, l_gate=18.0, c_inv=3.14,
                ss=70.0, v_t0=0.25, dibl=0.1, beta=1.8)
    base.update(over)
    return VSParams(**base)


@pytest.fixture(scope="session")
def stack():
    return default_stack()


@pytest.fixture(scope="session")
def devices():
    return DevicePair(n=mos2_params(), p=bp_params())


@pytest.fixture(scope="session")
def tuned_devices(devices):
    return DevicePair(n=tune_vt(devices.n, 1.0, V_DD),
                      p=tune_vt(devices.p, 1.0, V_DD))


@pytest.fixture(scope="session")
def library(stack, tuned_devices):
    """MoS2/BP library at 0.7 V with the default 5-nm dimensions."""
    return build_library(CellDims(), stack, tuned_devices.n, tuned_devices.p, V_DD)


@pytest.fixture(scope="session")
def small_netlist():
    return generate_netlist(300, 12, 2.2, 0.6, seed=11)
