"""Sklearn-style estimator facade over the smoothing pipeline.

``fit`` certifies the stratified set and builds the smoothed field;
``predict`` evaluates the field on rows of points and ``gradient`` returns
its gradients, so the smoother drops into pipelines, grid search and
cross-validation like any other estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .catalog import load_problem
from .fields import check_positive_on_box, make_epsilon, make_field
from .smoothing import SmoothingOptions, smooth_approximate


class StratifiedSmoother(BaseEstimator):
    """Smooth a library field so its gradient is tangent to every stratum.

    Parameters
    ----------
    problem : str
        Catalog id of the stratified set ("Aplus:n=2", "rank:n=3,m=3",
        "poly:file=...", "counterexample", "axis:n=2", "simplex2d").
    field : str, dict or ScalarField
        Field to approximate (library id, library spec dict, or a field).
    epsilon : float, str, dict or ScalarField
        Pointwise closeness tolerance; must be positive on the box.
    target_order : int
        Requested smoothness order of the output; >= 2 needs a normally
        flat problem.
    pre_smooth : {"auto", "always", "never"}
        Whether to mollify the input before staging.
    box_halfwidth : float
        Half-width of the default sampling box when ``fit`` gets no data.
    certify : bool
        Run the frontier / flatness certifications during ``fit``.
    seed : int
        Seed for every sampled procedure; fixed seed means reproducible fits.

    Attributes
    ----------
    smoothed_ : SmoothedField
        The finished pipeline output.
    stratification_ : Stratification
        The resolved catalog entry.
    n_features_in_ : int
        Ambient dimension.
    certificates_ : list of dict
        Certification reports gathered while fitting.
    """

    def __init__(
        self,
        problem: str = "Aplus:n=2",
        field="frobsq",
        epsilon=0.05,
        target_order: int = 1,
        pre_smooth: str = "auto",
        freeze_width=None,
        support_box=None,
        box_halfwidth: float = 2.0,
        certify: bool = True,
        seed: int = 0,
    ):
        self.problem = problem
        self.field = field
        self.epsilon = epsilon
        self.target_order = target_order
        self.pre_smooth = pre_smooth
        self.freeze_width = freeze_width
        self.support_box = support_box
        self.box_halfwidth = box_halfwidth
        self.certify = certify
        self.seed = seed

    def fit(self, X=None, y=None):
        """Certify the problem and build the smoothing pipeline.

        ``X`` is optional; when given, its rows set the sampling box as their
        bounding box (padded 10%), otherwise a symmetric box of half-width
        ``box_halfwidth`` is used.
        """
        strat = load_problem(self.problem)
        dim = strat.ambient_dim
        if X is not None:
            X = check_array(X, ensure_2d=True, dtype=float)
            if X.shape[1] != dim:
                raise ValueError(f"X has {X.shape[1]} features, problem is {dim}-dimensional")
            pad = 0.1 * (X.max(axis=0) - X.min(axis=0) + 1.0)
            box = (X.min(axis=0) - pad, X.max(axis=0) + pad)
        else:
            hw = float(self.box_halfwidth)
            box = (-hw * np.ones(dim), hw * np.ones(dim))

        field = make_field(self.field, dim, box=box)
        epsilon = make_epsilon(self.epsilon, dim, box=box)
        check_positive_on_box(epsilon, box, seed=self.seed)

        options = SmoothingOptions(
            target_order=self.target_order,
            pre_smooth=self.pre_smooth,
            freeze_width=self.freeze_width,
            support_box=self.support_box,
            certify=self.certify,
            seed=self.seed,
        )
        self.smoothed_ = smooth_approximate(field, epsilon, strat, options, box=box)
        self.stratification_ = strat
        self.box_ = box
        self.n_features_in_ = dim
        self.certificates_ = [c.to_dict() for c in self.smoothed_.certificates]
        return self

    def _validate_points(self, X) -> np.ndarray:
        check_is_fitted(self, "smoothed_")
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def predict(self, X) -> np.ndarray:
        """Evaluate the smoothed field at each row of X."""
        X = self._validate_points(X)
        return np.array([self.smoothed_(row) for row in X])

    def predict_base(self, X) -> np.ndarray:
        """Evaluate the original (unsmoothed) field at each row of X."""
        X = self._validate_points(X)
        return np.array([self.smoothed_.base(row) for row in X])

    def gradient(self, X) -> np.ndarray:
        """Gradient of the smoothed field at each row of X."""
        X = self._validate_points(X)
        return np.stack([self.smoothed_.grad(row) for row in X])

    def score(self, X, y=None) -> float:
        """1 - max |f - g| / epsilon over the rows of X (negative means the
        closeness contract was violated somewhere on X)."""
        X = self._validate_points(X)
        sm = self.smoothed_
        worst = max(abs(sm.base(row) - sm(row)) / sm.epsilon(row) for row in X)
        return 1.0 - worst
