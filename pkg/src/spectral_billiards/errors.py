"""Exception hierarchy shared across the toolkit.

Validation errors (bad inputs, out-of-range parameters) derive from
ValidationError; numerical failures (divergent solvers, non-convergent
quadratures) derive from NumericalError.  The CLI maps the two branches
to exit codes 2 and 3.
"""


class ToolkitError(Exception):
    pass


class ValidationError(ToolkitError):
    pass


class NumericalError(ToolkitError):
    pass


# -- billiard map ------------------------------------------------------------

class GlancingRay(ValidationError):
    """Tangential momentum too close to +-1 for a reliable chord."""


class NoTransversalHit(NumericalError):
    """Chord solver found no transversal boundary intersection."""


class NewtonDivergence(NumericalError):
    """Safeguarded Newton refinement failed to converge."""


class DegenerateChord(ValidationError):
    """Chord endpoints coincide."""


# -- invariant circles -------------------------------------------------------

class OrbitTooShort(ValidationError):
    pass


class NonCircleOrbit(ValidationError):
    """Conserved-quantity drift says the orbit is not on one circle."""


class ResonantRotation(ValidationError):
    """Rotation number is resonant within the scanned lattice."""


class FitDiverged(NumericalError):
    """Conjugacy fit did not reach the requested residual."""


class NonPeriodicOrbit(ValidationError):
    pass


class HyperbolicPoint(ValidationError):
    """Linearized return map has spectrum off the unit circle."""


# -- homological equation ----------------------------------------------------

class NonZeroMean(ValidationError):
    pass


class ResonantMode(ValidationError):
    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"resonant Fourier mode k={k}")


# -- Radon machinery ---------------------------------------------------------

class GlancingCircle(ValidationError):
    pass


class HOutOfRange(ValidationError):
    pass


class CirclesNotExchanged(ValidationError):
    """The two level-set components are not swapped by the symmetry."""


class QuadratureNonConvergence(NumericalError):
    pass


# -- quasi-eigenvalues -------------------------------------------------------

class DegenerateAction(ValidationError):
    pass


class NonPositiveD(ValidationError):
    pass


class MissingJet(ValidationError):
    """Requested expansion order exceeds the supplied Taylor data of L."""


# -- spectra / clusters ------------------------------------------------------

class EmptySpectrumAboveAlpha(ValidationError):
    pass


class DTooSmall(ValidationError):
    """Cluster exponent d must exceed n/2."""


class PathJumpsGap(ValidationError):
    def __init__(self, q_index, t_index, message=None):
        self.q_index = q_index
        self.t_index = t_index
        super().__init__(message or f"path {q_index} leaves its interval at grid step {t_index}")


class GridTooCoarse(ValidationError):
    pass


# -- rigidity ----------------------------------------------------------------

class RankDeficient(NumericalError):
    pass


# -- CLI ---------------------------------------------------------------------

class ConfigError(ValidationError):
    pass
