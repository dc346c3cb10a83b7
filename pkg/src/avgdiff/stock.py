"""Reference systems used by the bundled scenarios, scripts and acceptance tests."""

from .fields import field_from_spec


def _scalar(radius, *terms):
    return field_from_spec({"dim": 1, "radius": radius, "components": [list(terms)]})


def linear_decay(rate=1.0, radius=2.0):
    """X(n, x) = -rate * x."""
    return _scalar(radius, {"coeff": -rate, "powers": [1]})


def alternating_forced_decay(radius=2.0):
    """X(n, x) = -x + (-1)^n; its average is -x."""
    return _scalar(radius, {"coeff": -1.0, "powers": [1]}, {"coeff": 1.0, "powers": [0], "time": "alt"})


def alternating_constant(amplitude, radius=1.0):
    """R(n, x) = amplitude * (-1)^n; window sums over even N vanish."""
    return _scalar(radius, {"coeff": amplitude, "powers": [0], "time": "alt"})


def constant(value, radius=1.0):
    return _scalar(radius, {"coeff": value, "powers": [0]})


def mixed_zero_mean_perturbation(radius=1.0):
    """A zero-mean, x-dependent perturbation: (-1)^n (0.5 + x) + cos(2 pi n / 3) x^2."""
    return _scalar(
        radius,
        {"coeff": 0.5, "powers": [0], "time": "alt"},
        {"coeff": 1.0, "powers": [1], "time": "alt"},
        {"coeff": 1.0, "powers": [2], "time": "cos:3"},
    )


def zero_mean_period_two(radius=1.0):
    """f(n, x) = (-1)^n (1 + x)."""
    return _scalar(radius, {"coeff": 1.0, "powers": [0], "time": "alt"}, {"coeff": 1.0, "powers": [1], "time": "alt"})
