from dataclasses import asdict, dataclass, fields

ORDERS = ("web-sgfb", "sgfb-web")


@dataclass(frozen=True)
class NetConfig:
    """Architecture hyperparameters and ablation switches.

    ``enable_sgfb`` drops the whole gradient-fusion block; ``enable_sgfb_gradient_branch``
    keeps its two refinement blocks but removes the Sobel gate.
    """

    base_channels: int = 32
    num_scales: int = 3
    channel_multiplier: int = 2
    block_order: str = "web-sgfb"
    enable_wb_prior: bool = True
    enable_web: bool = True
    enable_sgfb: bool = True
    enable_sgfb_gradient_branch: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.base_channels < 4 or self.base_channels % 2:
            raise ValueError(f"base_channels must be even and >= 4, got {self.base_channels}")
        if self.num_scales < 1:
            raise ValueError(f"num_scales must be >= 1, got {self.num_scales}")
        if self.channel_multiplier < 1:
            raise ValueError(f"channel_multiplier must be >= 1, got {self.channel_multiplier}")
        if self.block_order not in ORDERS:
            raise ValueError(f"block_order must be one of {ORDERS}, got {self.block_order!r}")

    def channels(self, level):
        return self.base_channels * self.channel_multiplier ** level

    def to_blob(self):
        lines = []
        for k, v in asdict(self).items():
            lines.append(f"{k}={int(v) if isinstance(v, bool) else v}")
        return "\n".join(lines)

    @classmethod
    def from_blob(cls, text):
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, sep, raw = line.partition("=")
            if not sep or key not in kinds:
                raise ValueError(f"bad config line {line!r}")
            kind = kinds[key]
            if kind in (bool, "bool"):
                if raw not in ("0", "1"):
                    raise ValueError(f"bad boolean for {key}: {raw!r}")
                values[key] = raw == "1"
            elif kind in (int, "int"):
                values[key] = int(raw)
            else:
                values[key] = raw
        return cls(**values)
