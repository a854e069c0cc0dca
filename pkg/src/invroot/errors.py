class DivergenceError(ArithmeticError):
    """A computation produced values the active number model cannot hold."""


class InvalidInputError(ValueError):
    pass
