"""Soil water accounting for the orchard testbed.

Converts raw capacitance-probe counts to volumetric water content, aggregates
probe readings into a root-zone water depth (inches), and derives the four
management levels used everywhere else in the package: permanent wilting
point, available water capacity, field capacity, and the management allowed
depletion (MAD) threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

# Linear calibration of the capacitance probe: volumetric water content as a
# function of the raw ADC count.
ADC_GAIN = 9.92e-4
ADC_OFFSET = -0.45

# Catalog soil parameters are rounded independently, so the depth in feet and
# the depth in inches may disagree by a hair (1.97 ft vs 23.62 in).  Allow a
# small slack instead of demanding 12 * feet == inches exactly.
DEPTH_SLACK_IN = 0.05


def calibrate_sensor(raw: float) -> float:
    """Map a raw probe count to volumetric water content in [0, 1]."""
    vwc = ADC_GAIN * raw + ADC_OFFSET
    return min(1.0, max(0.0, vwc))


@dataclass(frozen=True)
class SoilProfile:
    """Static soil and root-zone description for one irrigation region.

    Parameters
    ----------
    awc_per_foot : available water capacity of the soil, inches of water per
        foot of soil depth.
    pwp_fraction : volumetric water content at permanent wilting point.
    root_depth_feet, root_depth_inches : effective root-zone depth.  Both are
        stored because they come from differently rounded catalog entries;
        they must agree to within ``DEPTH_SLACK_IN``.
    sensor_depth_spans : inches of root zone represented by each probe.  The
        spans must sum to the root depth in inches (within the same slack).
    mad_fraction : fraction of the available water band that management keeps
        in reserve above wilting; the stress threshold sits at
        v_pwp + mad_fraction * v_awc.  1.0 collapses the safe band to field
        capacity.
    """

    awc_per_foot: float
    pwp_fraction: float
    root_depth_feet: float
    root_depth_inches: float
    sensor_depth_spans: tuple[float, ...]
    mad_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.awc_per_foot <= 0:
            raise ValueError("awc_per_foot must be positive")
        if not 0 < self.pwp_fraction < 1:
            raise ValueError("pwp_fraction must lie in (0, 1)")
        if self.root_depth_feet <= 0 or self.root_depth_inches <= 0:
            raise ValueError("root depth must be positive")
        if abs(12.0 * self.root_depth_feet - self.root_depth_inches) > 12.0 * DEPTH_SLACK_IN:
            raise ValueError(
                "root_depth_feet and root_depth_inches describe different depths"
            )
        if not 0 < self.mad_fraction <= 1:
            raise ValueError("mad_fraction must lie in (0, 1]")
        if not self.sensor_depth_spans:
            raise ValueError("at least one sensor depth span is required")
        if any(s <= 0 for s in self.sensor_depth_spans):
            raise ValueError("sensor depth spans must be positive")
        if abs(sum(self.sensor_depth_spans) - self.root_depth_inches) > DEPTH_SLACK_IN:
            raise ValueError("sensor depth spans must cover the root zone")


def testbed_profile() -> SoilProfile:
    """Loam profile of the orchard testbed: two probes, each covering half
    of a 23.62-inch root zone."""
    return SoilProfile(
        awc_per_foot=2.4,
        pwp_fraction=0.10,
        root_depth_feet=1.97,
        root_depth_inches=23.62,
        sensor_depth_spans=(11.81, 11.81),
        mad_fraction=0.5,
    )


@dataclass(frozen=True)
class SoilLevels:
    """Root-zone water depths (inches) at the four management levels.

    Invariants: 0 <= v_pwp < v_fc, v_pwp < v_mad <= v_fc (a fully
    conservative profile may pin the stress threshold at field capacity) and
    v_fc == v_pwp + v_awc.
    """

    v_pwp: float
    v_awc: float
    v_fc: float
    v_mad: float

    def __post_init__(self) -> None:
        if not 0 <= self.v_pwp < self.v_mad <= self.v_fc:
            raise ValueError("levels must satisfy 0 <= v_pwp < v_mad <= v_fc")
        if abs(self.v_fc - (self.v_pwp + self.v_awc)) > 1e-9:
            raise ValueError("v_fc must equal v_pwp + v_awc")


def derive_levels(profile: SoilProfile) -> SoilLevels:
    """Compute management levels from a soil profile.

    Wilting point scales with the inch depth, available capacity with the
    foot depth (its units are inches of water per foot of soil), and the
    stress threshold keeps ``mad_fraction`` of the available band in reserve:

        v_pwp = pwp_fraction * root_depth_inches
        v_awc = awc_per_foot * root_depth_feet
        v_fc  = v_pwp + v_awc
        v_mad = v_pwp + mad_fraction * v_awc
    """
    v_pwp = profile.pwp_fraction * profile.root_depth_inches
    v_awc = profile.awc_per_foot * profile.root_depth_feet
    v_fc = v_pwp + v_awc
    v_mad = v_pwp + profile.mad_fraction * v_awc
    return SoilLevels(v_pwp=v_pwp, v_awc=v_awc, v_fc=v_fc, v_mad=v_mad)


@dataclass(frozen=True)
class MoistureReading:
    """One probe observation: raw count plus the root-zone span it stands for."""

    raw: float
    depth_span: float

    @property
    def vwc(self) -> float:
        return calibrate_sensor(self.raw)


def soil_water_content(readings: tuple[MoistureReading, ...] | list[MoistureReading],
                       profile: SoilProfile) -> float:
    """Total root-zone water depth (inches) from a full set of probe readings.

    Each probe's volumetric content is taken as representative of its depth
    span; the products sum to the stored depth.  The reading spans must match
    the profile's spans exactly (same probes, same order).
    """
    if len(readings) != len(profile.sensor_depth_spans):
        raise ValueError(
            f"expected {len(profile.sensor_depth_spans)} readings, got {len(readings)}"
        )
    for r, span in zip(readings, profile.sensor_depth_spans):
        if abs(r.depth_span - span) > 1e-9:
            raise ValueError("reading depth spans do not match the profile")
    return float(sum(r.vwc * r.depth_span for r in readings))
