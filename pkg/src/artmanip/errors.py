"""Exception types shared across the package."""


class ArtmanipError(Exception):
    """Base class for all package errors."""


class UnknownCategoryError(ArtmanipError):
    """Category label is not in the generator registry."""


class JointLimitError(ArtmanipError):
    """A joint value (or probe) falls outside the joint's limits."""


class GeometryError(ArtmanipError):
    """A query point does not lie on the requested surface."""


class NoSurfaceError(ArtmanipError):
    """Pixel query on a miss pixel (no rendered surface)."""


class EmptyPartError(ArtmanipError):
    """An affordance request found no valid pixels for the target part."""


class NoAffordanceError(ArtmanipError):
    """No pixels qualify as positive affordance samples; episode is skipped."""


class VisibilityError(ArtmanipError):
    """The target movable part is not visible from the sampled camera."""


class ContactError(ArtmanipError):
    """Probe or step requested on a detached contact state."""


class StallError(ArtmanipError):
    """Every probed direction produced zero displacement."""


class PromptFormatError(ArtmanipError):
    """A prompt or answer string does not match its task grammar."""
