"""Reference transverse-Mercator forward transform used as an independent oracle.

This is the Krueger series in the third flattening n, evaluated through the
conformal latitude (sixth order, nanometer-level accuracy over a UTM zone).
It shares no code or derivation with the production transform, which uses the
classic Snyder series in the eccentricity; the two agreeing is the point.

Used once to derive the frozen fixture values in
tests/fixtures/utm_reference_points.json and kept so the derivation is
reproducible.
"""

import math

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
K0 = 0.9996
FALSE_EASTING = 500000.0
FALSE_NORTHING_SOUTH = 10000000.0

_N = WGS84_F / (2.0 - WGS84_F)
_N2 = _N * _N
_N3 = _N2 * _N
_N4 = _N3 * _N
_N5 = _N4 * _N
_N6 = _N5 * _N

# Rectifying radius.
_A_RECT = WGS84_A / (1.0 + _N) * (1.0 + _N2 / 4.0 + _N4 / 64.0 + _N6 / 256.0)

# Forward series coefficients (Krueger's alpha).
_ALPHA = (
    _N / 2.0 - 2.0 * _N2 / 3.0 + 5.0 * _N3 / 16.0 + 41.0 * _N4 / 180.0
    - 127.0 * _N5 / 288.0 + 7891.0 * _N6 / 37800.0,
    13.0 * _N2 / 48.0 - 3.0 * _N3 / 5.0 + 557.0 * _N4 / 1440.0
    + 281.0 * _N5 / 630.0 - 1983433.0 * _N6 / 1935360.0,
    61.0 * _N3 / 240.0 - 103.0 * _N4 / 140.0 + 15061.0 * _N5 / 26880.0
    + 167603.0 * _N6 / 181440.0,
    49561.0 * _N4 / 161280.0 - 179.0 * _N5 / 168.0 + 6601661.0 * _N6 / 7257600.0,
    34729.0 * _N5 / 80640.0 - 3418889.0 * _N6 / 1995840.0,
    212378941.0 * _N6 / 319334400.0,
)

_E = math.sqrt(WGS84_F * (2.0 - WGS84_F))


def reference_utm_forward(zone, northern, lon_deg, lat_deg):
    """UTM easting/northing for a lon/lat via the conformal-latitude series."""
    lon0 = math.radians((zone - 1) * 6 - 180 + 3)
    lam = math.radians(lon_deg) - lon0
    phi = math.radians(lat_deg)

    sin_phi = math.sin(phi)
    # Conformal latitude tau' = tan(chi).
    t = math.sinh(math.atanh(sin_phi) - _E * math.atanh(_E * sin_phi))

    xi = math.atan2(t, math.cos(lam))
    eta = math.asinh(math.sin(lam) / math.hypot(t, math.cos(lam)))

    xi_sum = xi
    eta_sum = eta
    for j, alpha in enumerate(_ALPHA, start=1):
        xi_sum += alpha * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_sum += alpha * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    easting = FALSE_EASTING + K0 * _A_RECT * eta_sum
    northing = K0 * _A_RECT * xi_sum
    if not northern:
        northing += FALSE_NORTHING_SOUTH
    return easting, northing


def meridian_arc_quadrature(lat_deg, steps=200000):
    """Meridian arc length from the equator by numeric quadrature (cross-check)."""
    e2 = WGS84_F * (2.0 - WGS84_F)
    phi_end = math.radians(lat_deg)
    total = 0.0
    # Simpson's rule over the meridian curvature radius.
    h = phi_end / steps
    for i in range(steps + 1):
        phi = i * h
        m = WGS84_A * (1 - e2) / (1 - e2 * math.sin(phi) ** 2) ** 1.5
        if i == 0 or i == steps:
            w = 1.0
        elif i % 2 == 1:
            w = 4.0
        else:
            w = 2.0
        total += w * m
    return total * h / 3.0
