"""Cost reports shared by both protocols.

Upload/download/randomness figures are exact rationals; the complexity
entries are documented formula strings (asymptotics are not measured).
"""

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class CostReport:
    recovery_threshold: int
    threshold_a_major: int
    threshold_b_major: int
    variant: str
    upload_a: Fraction
    upload_b: Fraction
    download: Fraction
    randomness: Fraction
    randomness_count: int
    encoding_complexity_a: str
    encoding_complexity_b: str
    server_complexity: str
    decoding_complexity: str
    notes: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "recovery_threshold": self.recovery_threshold,
            "threshold_a_major": self.threshold_a_major,
            "threshold_b_major": self.threshold_b_major,
            "variant": self.variant,
            "upload_a": str(self.upload_a),
            "upload_b": str(self.upload_b),
            "download": str(self.download),
            "randomness": str(self.randomness),
            "randomness_count": self.randomness_count,
            "encoding_complexity_a": self.encoding_complexity_a,
            "encoding_complexity_b": self.encoding_complexity_b,
            "server_complexity": self.server_complexity,
            "decoding_complexity": self.decoding_complexity,
            "notes": list(self.notes),
        }
