"""Exception types shared across the package."""


class MeshTangledError(RuntimeError):
    """A quadrilateral has non-positive area (inverted element)."""

    def __init__(self, cell, step=None):
        self.cell = int(cell)
        self.step = step
        msg = f"cell {self.cell} has non-positive area"
        if step is not None:
            msg += f" at step {step}"
        super().__init__(msg)


class NumericalFailureError(RuntimeError):
    """Non-finite state or a non-convergent local iteration."""

    def __init__(self, message, step=None, cell=None):
        self.step = step
        self.cell = cell
        ctx = []
        if step is not None:
            ctx.append(f"step {step}")
        if cell is not None:
            ctx.append(f"cell {cell}")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)


class InsufficientSupportError(RuntimeError):
    """Too few samples in a recovery domain of interest, even after expansion."""

    def __init__(self, x, y):
        self.x = float(x)
        self.y = float(y)
        super().__init__(f"insufficient support for recovery at ({x:g}, {y:g})")


class IllConditionedError(RuntimeError):
    """Local least-squares system condition estimate above the safe limit."""

    def __init__(self, x, y, condition):
        self.x = float(x)
        self.y = float(y)
        self.condition = float(condition)
        super().__init__(
            f"ill-conditioned recovery system at ({x:g}, {y:g}): cond={condition:.3e}"
        )


class TooLargeError(ValueError):
    """A construction request exceeds its configured size cap."""


class EmptyParticleError(ValueError):
    """A particle shape too small to contain any lattice atom."""


class ParticleCollisionError(ValueError):
    """Two placed particles closer than the required clearance."""

    def __init__(self, first, second):
        self.pair = (int(first), int(second))
        super().__init__(f"placed particles {first} and {second} overlap within clearance")


class SceneValidationError(ValueError):
    """A scene document failed validation; carries every error found."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.errors)
        super().__init__(f"invalid scene: {lines}")
