"""Model specifications and the default ten-model pool."""

from dataclasses import dataclass, field

from ..errors import ConfigError

FAMILIES = {
    "mlp": ("gd", "momentum", "rprop"),
    "svr": ("rbf", "linear", "poly"),
    "gbm": ("squared", "laplace", "t4"),
    "forest": ("standard",),
}


@dataclass(frozen=True)
class ModelSpec:
    """One pool member: an id, a model family and a family variant."""

    model_id: str
    family: str
    variant: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.model_id:
            raise ConfigError("model_id must be non-empty")
        if self.family not in FAMILIES:
            raise ConfigError("unknown model family %r (expected one of %s)"
                              % (self.family, sorted(FAMILIES)))
        if self.variant not in FAMILIES[self.family]:
            raise ConfigError("unknown %s variant %r (expected one of %s)"
                              % (self.family, self.variant,
                                 list(FAMILIES[self.family])))

    @property
    def label(self):
        return "%s/%s" % (self.family, self.variant)


def default_pool_specs():
    """The standard ten-model pool: three MLPs, three SVRs, three GBMs, one
    random forest."""
    rows = [
        ("M1", "mlp", "gd"),
        ("M2", "mlp", "momentum"),
        ("M3", "mlp", "rprop"),
        ("M4", "svr", "rbf"),
        ("M5", "svr", "linear"),
        ("M6", "svr", "poly"),
        ("M7", "gbm", "squared"),
        ("M8", "gbm", "laplace"),
        ("M9", "gbm", "t4"),
        ("M10", "forest", "standard"),
    ]
    return [ModelSpec(mid, fam, var) for mid, fam, var in rows]
