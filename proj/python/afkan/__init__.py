"""AF-KAN layers, ReLU-KAN and MLP baselines, and an MNIST training harness."""

from ._afkan import (
    DataError,
    Error,
    Model,
    ModelSpec,
    NumericError,
    ShapeError,
    ValueError,
    activation,
    basis_a,
    bspline_basis,
    count_params,
    estimate_flops,
    gradient_suite,
    kan_params_formula,
    l2_minmax,
    load_mnist,
    mlp_params_formula,
    phase_init,
    relu_kan_r,
    train,
)


def make_spec(**fields):
    """ModelSpec with the given fields overriding the defaults."""
    spec = ModelSpec()
    for name, value in fields.items():
        if not hasattr(spec, name):
            raise AttributeError(f"ModelSpec has no field {name!r}")
        setattr(spec, name, value)
    spec.validate()
    return spec


__all__ = [
    "DataError",
    "Error",
    "Model",
    "ModelSpec",
    "NumericError",
    "ShapeError",
    "ValueError",
    "activation",
    "basis_a",
    "bspline_basis",
    "count_params",
    "estimate_flops",
    "gradient_suite",
    "kan_params_formula",
    "l2_minmax",
    "load_mnist",
    "make_spec",
    "mlp_params_formula",
    "phase_init",
    "relu_kan_r",
    "train",
]
