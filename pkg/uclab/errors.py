class LabError(Exception):
    """Base class for every failure raised by the lab"""
    pass


class JetDomainError(LabError):
    """Raised when an elementary function is applied outside its domain"""

    def __init__(self, message, base_point=None):
        super().__init__(message)
        self.base_point = base_point


class SymbolError(LabError):
    """Raised for non-elliptic symbols or degenerate weight gradients"""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConstructionError(LabError):
    """Raised when the annulus construction breaks one of its invariants"""

    def __init__(self, message, annulus=None, witness=None):
        super().__init__(message)
        self.annulus = annulus
        self.witness = witness

    def to_dict(self):
        return {
            'error': str(self),
            'annulus': self.annulus,
            'witness': self.witness,
        }


class QuadratureError(LabError):
    """Raised when panel refinement hits its cap without converging"""

    def __init__(self, message, worst_cell=None):
        super().__init__(message)
        self.worst_cell = worst_cell


class RangeError(LabError):
    """Raised when a radius lies outside the range a solution covers"""
    pass


class ConfigError(LabError):
    """Raised when a run configuration fails validation"""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}
