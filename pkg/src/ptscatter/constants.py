"""Physical constants and unit conversions.

Internal computation runs in electron-volts and nanometres. Lengths enter the
public API in micrometres and are converted once.
"""

#: hbar^2 / (2 m_e) in eV nm^2 (CODATA).
HBAR2_2ME = 0.0380998

NM_PER_UM = 1000.0

#: Critical energy over E0 read off the published eigenvalue plot.
PAPER_CRITICAL_ENERGY = 0.53

#: Relative band around PAPER_CRITICAL_ENERGY accepted as agreement.
CRITICAL_ENERGY_BAND = 0.20

#: Largest |Im(k1 L/2)| the scaled closed form accepts. The scaled form stays
#: finite for any value (t underflows to 0), so no limit is imposed.
MAX_IMAG_LAMBDA = float("inf")

#: Largest |Im(k1 L/2)| for the unscaled (cos/sin) closed form.
MAX_IMAG_LAMBDA_VERBATIM = 20.0

#: |E - V| below this (eV) is treated as the k1 -> 0 degenerate point.
DEGENERATE_ENERGY_TOL = 1e-12
