"""Physical constants and the internal unit system.

Circuit arithmetic throughout the package uses a consistent scaled unit
system so products come out in natural units without conversion factors:

    time ps | capacitance fF | resistance kOhm | current mA | voltage V

With these, R*C is in ps, C*dV/dt is in mA, and I*V*t is in fJ.
Device currents at module interfaces are uA/um (per unit gated width);
sheet quantities use uF/cm^2; geometry is in nm unless a name says um.
"""

import math

K_B = 1.380649e-23  # J/K
Q_E = 1.602176634e-19  # C
EPS0_F_PER_M = 8.8541878128e-12
K_SIO2 = 3.9
LN10 = math.log(10.0)


def thermal_voltage(temperature_k: float) -> float:
    """kT/q in volts."""
    return K_B * temperature_k / Q_E


# 1 uF/cm^2 * 1 nm of gate length = 0.01 fF per um of gated width
UF_CM2_NM_TO_FF_UM = 0.01

# rho[uOhm*cm] * 1e-8 = rho[Ohm*m]
UOHM_CM_TO_OHM_M = 1e-8
