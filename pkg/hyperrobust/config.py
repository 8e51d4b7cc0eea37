import os
import tomllib
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from hyperrobust.cascade import AttackKind, AttackSpec, CascadeParams
from hyperrobust.errors import InvalidConfig
from hyperrobust.generators import DEFAULT_EDGE_SIZES, Family, GeneratorConfig
from hyperrobust.model import AggregationMode, Readout
from hyperrobust.robustness import DEFAULT_DELTA_PRED, QuadratureConfig
from hyperrobust.training import TrainConfig

# train samples per family when train_count is unset
HOMOGENEOUS_TRAIN_COUNT = 1000
MIXED_TRAIN_COUNT = 500


class PipelineConfig(BaseModel):
    """Every setting of the dataset, labelling and training pipeline.

    Keys are flat so the same names work in ``hyperrobust.toml``, in
    ``HYPERROBUST_*`` environment variables and on the command line.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # dataset
    families: tuple[Family, ...] = (Family.ER,)
    mode: Literal["homogeneous", "mixed"] = "homogeneous"
    num_nodes: int = Field(default=200, ge=1)
    train_count: int | None = Field(default=None, ge=0)
    test_count: int = Field(default=200, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int = Field(default=1, ge=1)
    # generators
    connectivity: Literal["retry", "bridge"] = "retry"
    dedup: bool = True
    edge_sizes: tuple[int, ...] = DEFAULT_EDGE_SIZES
    p: float = 0.05
    k_nn: int = 10
    p_rw: float = 0.5
    m: int = 5
    c: int = 5
    p_in: float = 0.1
    p_out: float = 0.01
    k: int = 5
    # attack
    attack: AttackKind = AttackKind.STATIC
    alpha: float = 0.5
    beta: float = 1.0
    # quadrature
    epsilon: float | None = None
    delta_pred: float = DEFAULT_DELTA_PRED
    d_max: int = 10
    # training
    eta_max: float = 1e-3
    eta_min: float = 1e-5
    t_max: int = 200
    epochs: int = 200
    batch_size: int = 32
    weight_decay: float = 0.01
    num_layers: int = 3
    width: int = 64
    aggregation_mode: AggregationMode = AggregationMode.INJECTIVE_SUM
    schedule: Literal["cosine", "constant"] = "cosine"
    validation_fraction: float = 0.0
    feature_ablation: tuple[str, ...] = ()
    readout: Readout = Readout.DUAL
    max_grad_norm: float | None = 1.0

    @property
    def resolved_train_count(self) -> int:
        if self.train_count is not None:
            return self.train_count
        return MIXED_TRAIN_COUNT if self.mode == "mixed" else HOMOGENEOUS_TRAIN_COUNT

    def generator_config(self, family: Family, seed: int) -> GeneratorConfig:
        return GeneratorConfig(
            family=family,
            num_nodes=self.num_nodes,
            seed=seed,
            edge_sizes=self.edge_sizes,
            p=self.p,
            k_nn=self.k_nn,
            p_rw=self.p_rw,
            m=self.m,
            c=self.c,
            p_in=self.p_in,
            p_out=self.p_out,
            k=self.k,
            dedup=self.dedup,
            connectivity=self.connectivity,
        )

    def attack_spec(self) -> AttackSpec:
        try:
            if self.attack is AttackKind.STATIC:
                return AttackSpec.static()
            return AttackSpec(
                kind=AttackKind.DYNAMIC,
                params=CascadeParams(alpha=self.alpha, beta=self.beta),
            )
        except ValidationError as e:
            raise InvalidConfig(f"invalid attack settings: {e}") from e

    def quadrature_config(self) -> QuadratureConfig:
        try:
            return QuadratureConfig(
                epsilon=self.epsilon, delta_pred=self.delta_pred, d_max=self.d_max
            )
        except ValidationError as e:
            raise InvalidConfig(f"invalid quadrature settings: {e}") from e

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(
                eta_max=self.eta_max,
                eta_min=self.eta_min,
                t_max=self.t_max,
                epochs=self.epochs,
                batch_size=self.batch_size,
                weight_decay=self.weight_decay,
                seed=self.seed,
                num_layers=self.num_layers,
                width=self.width,
                aggregation_mode=self.aggregation_mode,
                schedule=self.schedule,
                validation_fraction=self.validation_fraction,
                feature_ablation=self.feature_ablation,
                readout=self.readout,
                max_grad_norm=self.max_grad_norm,
            )
        except ValidationError as e:
            raise InvalidConfig(f"invalid training settings: {e}") from e


def load_hyperrobust_toml(path: str | None = None) -> dict[str, Any]:
    """Load a ``hyperrobust.toml`` configuration file.

    Searches (in order):
    1. The explicit ``path`` argument.
    2. ``$HYPERROBUST_CONFIG`` environment variable.
    3. ``hyperrobust.toml`` in the current working directory.

    Returns an empty dict (plus environment overrides) if no file is found.

    The file holds a flat ``[hyperrobust]`` table whose keys are the fields
    of :class:`PipelineConfig`:

    .. code-block:: toml

        [hyperrobust]
        families = ["ER", "SF"]
        num_nodes = 50
        train_count = 200
        test_count = 50
        attack = "dynamic"
        alpha = 0.5
        connectivity = "bridge"
        threads = 4

    Environment variables prefixed with ``HYPERROBUST_`` override file values
    (e.g. ``HYPERROBUST_THREADS=8``, ``HYPERROBUST_FAMILIES=ER,UF``).
    """
    candidates = [
        path,
        os.getenv("HYPERROBUST_CONFIG"),
        "hyperrobust.toml",
    ]
    for candidate in candidates:
        if candidate and os.path.exists(candidate):
            try:
                with open(candidate, "rb") as fh:
                    data = tomllib.load(fh)
            except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
                raise InvalidConfig(f"{candidate} is not valid TOML: {e}") from e
            result: dict[str, Any] = dict(data.get("hyperrobust", {}))
            _apply_env_overrides(result)
            return result

    result = {}
    _apply_env_overrides(result)
    return result


def _apply_env_overrides(cfg: dict[str, Any]) -> None:
    """Apply ``HYPERROBUST_*`` environment variables on top of cfg dict (in-place)."""
    _BOOL_KEYS = {"dedup"}
    _INT_KEYS = {
        "num_nodes",
        "train_count",
        "test_count",
        "seed",
        "threads",
        "k_nn",
        "m",
        "c",
        "k",
        "d_max",
        "t_max",
        "epochs",
        "batch_size",
        "num_layers",
        "width",
    }
    _FLOAT_KEYS = {
        "p",
        "p_rw",
        "p_in",
        "p_out",
        "alpha",
        "beta",
        "epsilon",
        "delta_pred",
        "eta_max",
        "eta_min",
        "weight_decay",
        "validation_fraction",
        "max_grad_norm",
    }
    _LIST_KEYS = {"families", "edge_sizes", "feature_ablation"}
    _STR_KEYS = {"mode", "connectivity", "attack", "aggregation_mode", "schedule", "readout"}

    for env_key, env_val in os.environ.items():
        if not env_key.startswith("HYPERROBUST_"):
            continue
        cfg_key = env_key[len("HYPERROBUST_") :].lower()
        if cfg_key in _BOOL_KEYS:
            flag = env_val.strip().lower()
            if flag not in ("1", "true", "yes", "0", "false", "no"):
                raise InvalidConfig(f"{env_key}={env_val!r} is not a boolean")
            cfg[cfg_key] = flag in ("1", "true", "yes")
        elif cfg_key in _INT_KEYS:
            try:
                cfg[cfg_key] = int(env_val)
            except ValueError as e:
                raise InvalidConfig(f"{env_key}={env_val!r} is not an integer") from e
        elif cfg_key in _FLOAT_KEYS:
            try:
                cfg[cfg_key] = float(env_val)
            except ValueError as e:
                raise InvalidConfig(f"{env_key}={env_val!r} is not a number") from e
        elif cfg_key in _LIST_KEYS:
            items = [x.strip() for x in env_val.split(",") if x.strip()]
            cfg[cfg_key] = [int(x) if x.isdigit() else x for x in items]
        elif cfg_key in _STR_KEYS:
            cfg[cfg_key] = env_val


def load_config(path: str | None = None, **overrides: Any) -> PipelineConfig:
    """File and environment settings with non-None ``overrides`` on top."""
    data = load_hyperrobust_toml(path)
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise InvalidConfig(f"invalid configuration: {e}") from e
