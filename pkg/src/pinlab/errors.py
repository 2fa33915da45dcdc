"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
NonFiniteError -> 3, BracketError / BudgetError -> 4.
"""


class ValidationError(ValueError):
    """A parameter violates a documented precondition.  Messages name the field."""


class IllDefinedProfileError(ValidationError):
    """A closed-form profile was requested outside its domain (negative radicand)."""


class NonFiniteError(FloatingPointError):
    """A simulation state stopped being finite (numerical blow-up)."""


class BracketError(RuntimeError):
    """A pinned/propagating bracket could not be established within budget."""


class BudgetError(RuntimeError):
    """An iteration budget was exhausted before reaching the requested tolerance."""
