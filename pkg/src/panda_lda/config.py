"""Experiment configuration: one flat JSON object, every key overridable from the CLI."""
from dataclasses import asdict, dataclass, field, fields
import json

from .datagen import ModelKind, SimSpec
from .errors import InvalidInputError
from .solver import AdmmConfig
from .tuning import TuneGrid, default_lambda_grid

METHODS = ("PANDA", "LPD", "AdaLDA", "KPANDA", "Bayes")
MODES = ("theoretical", "practical", "fixed")


@dataclass
class ExperimentConfig:
    model: str = "AR1"
    p: int = 400
    s: int = 5
    eta_scale: float = 1.0
    model_seed: int = None  # None: use ``seed``
    methods: list = field(default_factory=lambda: ["PANDA", "LPD", "AdaLDA"])
    n0: int = 200
    n1: int = 200
    n_val: int = 200  # per class
    n_test: int = 1000  # per class
    replicates: int = 10
    seed: int = 0
    mode: str = "practical"
    c: float = 20.0
    lambda_tilde: float = 1.0  # used in fixed mode
    lambda_grid: list = field(default_factory=lambda: list(default_lambda_grid()))
    c_values: list = field(default_factory=lambda: [20.0])
    warm_start: bool = True
    admm_rho: float = 1.0
    admm_eta_factor: float = 0.9
    admm_max_iters: int = 20000
    admm_primal_tol: float = 1e-6
    admm_change_tol: float = 1e-8
    trace_every: int = 0
    selection_threshold: float = 0.01
    output: str = "panda_run"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.replicates < 1:
            raise InvalidInputError("replicates must be at least 1")
        if not self.methods:
            raise InvalidInputError("methods must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise InvalidInputError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {list(MODES)}, got {self.mode!r}")
        if min(self.n0, self.n1) < 2:
            raise InvalidInputError("n0 and n1 must be at least 2")
        if self.n_val < 1 and self.mode == "practical":
            raise InvalidInputError("practical mode needs a validation set (n_val >= 1)")
        if self.n_test < 0:
            raise InvalidInputError("n_test must be nonnegative")
        if self.c <= 0 or self.lambda_tilde < 0:
            raise InvalidInputError("c must be positive and lambda_tilde nonnegative")
        ModelKind(self.model)
        self.sim_spec()
        self.grid()
        self.admm()

    def sim_spec(self):
        seed = self.seed if self.model_seed is None else self.model_seed
        return SimSpec(model=self.model, p=self.p, s=self.s, eta_scale=self.eta_scale, seed=seed)

    def grid(self):
        return TuneGrid(tuple(self.lambda_grid), tuple(self.c_values))

    def admm(self):
        return AdmmConfig(rho=self.admm_rho, eta_factor=self.admm_eta_factor,
                          max_iters=self.admm_max_iters, primal_tol=self.admm_primal_tol,
                          change_tol=self.admm_change_tol, trace_every=self.trace_every)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {unknown}")
        return cls(**d)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(d, dict):
            raise InvalidInputError(f"{path}: expected a JSON object")
        # a run manifest nests the config under "config"
        return cls.from_dict(d.get("config", d))
