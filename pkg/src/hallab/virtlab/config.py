"""Ground-truth configuration of the simulated lab."""

from __future__ import annotations

from dataclasses import dataclass, field

from .s21 import Background, ResonatorSpec


@dataclass(frozen=True)
class PowerPoint:
    """Readout-power operating point (power in channel-gain units)."""

    power: float
    leak: float
    assign_error: float


@dataclass(frozen=True)
class QubitSpec:
    """Error model of the simulated qubit readout chain."""

    leak: float = 0.0            # leakage probability per readout
    assign_error: float = 0.0    # readout assignment error
    pi_error: float = 0.0        # pi-pulse failure probability
    leaked_bit_bias: float = 0.5  # P(bit = 1) once leaked
    power_table: tuple[PowerPoint, ...] = ()

    def __post_init__(self):
        for name in ("leak", "assign_error", "pi_error", "leaked_bit_bias"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a probability, got {v}")
        powers = [p.power for p in self.power_table]
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValueError("power_table powers must be strictly increasing")

    def at_power(self, power: float | None) -> tuple[float, float]:
        """(leak, assign_error) for the nearest power-table entry, or the
        base values when no power is given or the table is empty."""
        if power is None or not self.power_table:
            return self.leak, self.assign_error
        best = min(self.power_table, key=lambda p: (abs(p.power - power), p.power))
        return best.leak, best.assign_error


@dataclass(frozen=True)
class LabConfig:
    resonators: tuple[ResonatorSpec, ...] = ()
    background: Background = field(default_factory=Background)
    noise_sigma: float = 0.003  # per point per single average, linear units
    qubit: QubitSpec = field(default_factory=QubitSpec)

    def to_dict(self) -> dict:
        return {
            "resonators": [
                {"f_r": r.f_r, "q_i": r.q_i, "q_c": r.q_c, "phi": r.phi}
                for r in self.resonators
            ],
            "background": {
                "a": self.background.a,
                "alpha": self.background.alpha,
                "tau": self.background.tau,
            },
            "noise_sigma": self.noise_sigma,
            "qubit": {
                "leak": self.qubit.leak,
                "assign_error": self.qubit.assign_error,
                "pi_error": self.qubit.pi_error,
                "leaked_bit_bias": self.qubit.leaked_bit_bias,
                "power_table": [
                    {"power": p.power, "leak": p.leak,
                     "assign_error": p.assign_error}
                    for p in self.qubit.power_table
                ],
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LabConfig":
        qubit = data.get("qubit", {})
        background = data.get("background", {})
        return cls(
            resonators=tuple(
                ResonatorSpec(f_r=r["f_r"], q_i=r["q_i"], q_c=r["q_c"],
                              phi=r.get("phi", 0.0))
                for r in data.get("resonators", [])
            ),
            background=Background(
                a=background.get("a", 1.0),
                alpha=background.get("alpha", 0.0),
                tau=background.get("tau", 0.0),
            ),
            noise_sigma=data.get("noise_sigma", 0.003),
            qubit=QubitSpec(
                leak=qubit.get("leak", 0.0),
                assign_error=qubit.get("assign_error", 0.0),
                pi_error=qubit.get("pi_error", 0.0),
                leaked_bit_bias=qubit.get("leaked_bit_bias", 0.5),
                power_table=tuple(
                    PowerPoint(power=p["power"], leak=p["leak"],
                               assign_error=p["assign_error"])
                    for p in qubit.get("power_table", [])
                ),
            ),
        )
