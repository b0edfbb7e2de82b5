"""
Unconstrained monotonic neural network conditioned on (state, action)

    G(x | c) = integral_0^x g(t, c) dt + beta(c)

g is a free-form network with a strictly positive output head, so G is
strictly increasing in x for every conditioning vector c. The integral is
evaluated with Clenshaw-Curtis quadrature; its gradient is the quadrature of
the integrand gradients (Leibniz rule), so the forward pass keeps no graph.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from distributional.quadrature import DEFAULT_NODE_COUNT, clenshaw_curtis_rule
from engine.layers import Linear, Mlp, Module, xavier_init
from engine.tensor import Parameter, Tensor, enable_grad, is_grad_enabled, no_grad
from utils.errors import DimensionError, DomainError, NumericError, OutOfRangeError

logger = logging.getLogger(__name__)

LATENTS = ("logistic", "normal")

# Integrand evaluations per chunk when integrating large batches
CHUNK_EVALUATIONS = 1 << 16

INVERT_BRACKET_LIMIT = 1e6
INVERT_MAX_BISECTIONS = 200


def latent_cdf(values: Tensor, latent: str = "logistic") -> Tensor:
    if latent == "logistic":
        return values.sigmoid()
    if latent == "normal":
        return values.normal_cdf()
    raise DomainError(f"unknown latent distribution: {latent}")


def latent_density(values: Tensor, latent: str = "logistic") -> Tensor:
    """Derivative of latent_cdf"""
    if latent == "logistic":
        s = values.sigmoid()
        return s * (1.0 - s)
    if latent == "normal":
        return (values * values * -0.5).exp() * (1.0 / np.sqrt(2.0 * np.pi))
    raise DomainError(f"unknown latent distribution: {latent}")


class ConditionedIntegrand(Module):
    """
    g(t, c): the first layer acts on [t, c] and is kept as a time row and a
    condition block so the condition term is computed once per row of c.
    Hidden units are elu, so g is C1 in t.
    """

    def __init__(self, condition_width: int, hidden: Sequence[int], rng: np.random.Generator):
        if not hidden:
            raise DimensionError("the integrand needs at least one hidden layer")
        first = xavier_init((1 + condition_width, hidden[0]), rng)
        self.time_weight = Parameter(first.data[:1])
        self.condition_weight = Parameter(first.data[1:])
        self.bias = Parameter(np.zeros(hidden[0]))
        widths = list(hidden) + [1]
        activations = ["elu"] * (len(widths) - 2) + ["positive"]
        self.tail = Mlp(widths, activations, rng)

    def __call__(self, t, c: Tensor) -> Tensor:
        """t: (B, M) evaluation points, c: (B, d) -> (B, M) positive values"""
        t = Tensor.lift(t)
        rows, points = t.shape
        if c.shape[0] != rows:
            raise DimensionError(f"{rows} point rows but {c.shape[0]} conditioning rows")
        time_term = t.reshape(rows, points, 1) @ self.time_weight
        condition_term = (c @ self.condition_weight + self.bias).reshape(rows, 1, -1)
        hidden = (time_term + condition_term).elu()
        return self.tail(hidden).reshape(rows, points)


class UmnnModel(Module):
    """
    Embedding network on [state, one-hot action] producing c, a linear
    offset head beta(c) and the positive integrand g(t, c).
    """

    def __init__(
        self,
        state_dim: int,
        n_actions: int,
        dnn_hidden: Sequence[int] = (128,),
        umnn_hidden: Sequence[int] = (128,),
        n_cc: int = DEFAULT_NODE_COUNT,
        rng: Optional[np.random.Generator] = None,
    ):
        rng = rng if rng is not None else np.random.default_rng()
        if state_dim < 1 or n_actions < 1:
            raise DimensionError(f"state_dim={state_dim} and n_actions={n_actions} must be positive")
        self.state_dim = int(state_dim)
        self.n_actions = int(n_actions)
        self.dnn_hidden = tuple(int(w) for w in dnn_hidden)
        self.umnn_hidden = tuple(int(w) for w in umnn_hidden)
        self.n_cc = int(n_cc)
        self.rule = clenshaw_curtis_rule(self.n_cc)

        widths = [self.state_dim + self.n_actions, *self.dnn_hidden]
        self.embedding = Mlp(widths, ["relu"] * len(self.dnn_hidden), rng)
        self.condition_width = widths[-1]
        self.offset = Linear(self.condition_width, 1, "identity", rng)
        self.integrand_net = ConditionedIntegrand(self.condition_width, self.umnn_hidden, rng)

    def architecture(self) -> dict:
        return {
            "state_dim": self.state_dim,
            "n_actions": self.n_actions,
            "dnn_hidden": list(self.dnn_hidden),
            "umnn_hidden": list(self.umnn_hidden),
            "n_cc": self.n_cc,
        }

    # ------------------------------------------------------------ conditioning
    def condition(self, states, actions) -> Tensor:
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        actions = np.atleast_1d(np.asarray(actions, dtype=np.int64))
        if states.shape[1] != self.state_dim:
            raise DimensionError(f"state width {states.shape[1]} != {self.state_dim}")
        if len(actions) != len(states):
            raise DimensionError(f"{len(states)} states but {len(actions)} actions")
        if np.any((actions < 0) | (actions >= self.n_actions)):
            raise DomainError(f"action ids must lie in [0, {self.n_actions})")
        one_hot = np.eye(self.n_actions)[actions]
        return self.embedding(np.concatenate([states, one_hot], axis=1))

    def condition_all_actions(self, states) -> Tensor:
        """Rows ordered state-major: (s0,a0), (s0,a1), ..."""
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        repeated = np.repeat(states, self.n_actions, axis=0)
        actions = np.tile(np.arange(self.n_actions), len(states))
        return self.condition(repeated, actions)

    # ------------------------------------------------------------- the map G
    def integrand(self, x, c: Tensor) -> Tensor:
        return self.integrand_net(x, c)

    def beta(self, c: Tensor) -> Tensor:
        return self.offset(c).reshape(c.shape[0])

    def _node_points(self, x: np.ndarray) -> np.ndarray:
        # integral_0^x g = x/2 * sum_n w_n g(x (u_n + 1) / 2); negative x flips the sign
        return x[..., None] * (0.5 * (self.rule.nodes + 1.0))

    def _chunks(self, rows: int, points: int):
        step = max(1, CHUNK_EVALUATIONS // max(1, points * self.rule.count))
        for start in range(0, rows, step):
            yield slice(start, min(rows, start + step))

    def _integrate_values(self, x: np.ndarray, c_data: np.ndarray) -> np.ndarray:
        rows, points = x.shape
        out = np.empty((rows, points))
        with no_grad():
            for block in self._chunks(rows, points):
                nodes = self._node_points(x[block]).reshape(block.stop - block.start, -1)
                g = self.integrand_net(nodes, Tensor(c_data[block])).data
                g = g.reshape(block.stop - block.start, points, self.rule.count)
                out[block] = 0.5 * x[block] * (g @ self.rule.weights)
        if not np.all(np.isfinite(out)):
            raise NumericError("non-finite quadrature result")
        return out

    def integral(self, x, c: Tensor) -> Tensor:
        """integral_0^x g(t, c) dt for x of shape (B, K); returns (B, K)"""
        x = Tensor.lift(x)
        if x.ndim != 2:
            raise DimensionError(f"integration limits must be a (rows, points) array, got shape {x.shape}")
        x_data = x.data
        if x_data.shape[0] != c.shape[0]:
            raise DimensionError(f"{x_data.shape[0]} point rows but {c.shape[0]} conditioning rows")
        value = self._integrate_values(x_data, c.data)
        params = self.integrand_net.parameters()
        needs_grad = is_grad_enabled() and (c.requires_grad or x.requires_grad or any(p.requires_grad for p in params))

        def leibniz(upstream: np.ndarray):
            c_grad = np.zeros_like(c.data)
            points = x_data.shape[1]
            with enable_grad():
                for block in self._chunks(x_data.shape[0], points):
                    n = block.stop - block.start
                    c_leaf = Tensor(c.data[block], requires_grad=True)
                    nodes = self._node_points(x_data[block]).reshape(n, -1)
                    g = self.integrand_net(nodes, c_leaf).reshape(n, points, self.rule.count)
                    scale = (0.5 * x_data[block] * upstream[block])[..., None] * self.rule.weights
                    (g * scale).sum().backward()
                    c_grad[block] = c_leaf.grad
            x_grad = None
            if x.requires_grad:
                with no_grad():
                    x_grad = upstream * self.integrand_net(x_data, Tensor(c.data)).data
            return c_grad, x_grad

        return Tensor.from_op(value, (c, x), leibniz, requires_grad=needs_grad)

    def forward(self, x, c: Tensor) -> Tensor:
        return self.integral(x, c) + self.beta(c).reshape(c.shape[0], 1)

    __call__ = forward

    # ----------------------------------------------------------------- views
    def cdf(self, z, c: Tensor, latent: str = "logistic") -> Tensor:
        return latent_cdf(self.forward(z, c), latent)

    def pdf(self, z, c: Tensor, latent: str = "logistic") -> Tensor:
        """g(z, c) * sigma'(G(z | c)); the exact z-derivative of cdf"""
        return self.integrand(z, c) * latent_density(self.forward(z, c), latent)

    def quantile(self, tau, c: Tensor) -> Tensor:
        values = np.asarray(tau.data if isinstance(tau, Tensor) else tau, dtype=np.float64)
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise DomainError("quantile fractions must lie in [0, 1]")
        return self.forward(tau, c)

    def invert(self, y, c: Tensor, tol: float = 1e-8) -> np.ndarray:
        """
        x with |G(x | c) - y| <= tol by bracket doubling then bisection; y of shape (B, K).
        The bracket starts at [y - 1, y + 1] and never leaves [-INVERT_BRACKET_LIMIT, INVERT_BRACKET_LIMIT].
        """
        if tol <= 0:
            raise DomainError(f"tol must be positive, got {tol}")
        y = np.atleast_2d(np.asarray(y, dtype=np.float64))
        limit = INVERT_BRACKET_LIMIT
        with no_grad():
            c = Tensor(c.data)
            def G(x):
                return self.forward(x, c).data

            width = np.ones_like(y)
            lo = np.clip(y - width, -limit, limit)
            hi = np.clip(y + width, -limit, limit)
            bracketed = (G(lo) <= y) & (G(hi) >= y)
            while not np.all(bracketed):
                exhausted = ~bracketed & (lo <= -limit) & (hi >= limit)
                if np.any(exhausted):
                    raise OutOfRangeError(f"no inversion bracket within |x| <= {limit:g}")
                width = np.where(bracketed, width, 2.0 * width)
                lo = np.where(bracketed, lo, np.clip(y - width, -limit, limit))
                hi = np.where(bracketed, hi, np.clip(y + width, -limit, limit))
                bracketed = (G(lo) <= y) & (G(hi) >= y)

            mid = 0.5 * (lo + hi)
            for _ in range(INVERT_MAX_BISECTIONS):
                value = G(mid)
                if np.all(np.abs(value - y) <= tol):
                    break
                below = value < y
                lo = np.where(below, mid, lo)
                hi = np.where(below, hi, mid)
                mid = 0.5 * (lo + hi)
        return mid

