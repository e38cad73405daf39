"""Exception types raised by the saliency pipeline."""


class BTOFError(Exception):
    """Base class for every error raised by this package."""


class UnreadableFile(BTOFError):
    pass


class UnsupportedFormat(BTOFError):
    pass


class ImageTooSmall(BTOFError):
    pass


class TargetTooLarge(BTOFError):
    pass


class DimensionMismatch(BTOFError, ValueError):
    pass


class BinCountMismatch(BTOFError, ValueError):
    pass


class IndexMismatch(BTOFError, ValueError):
    pass


class SingularSystem(BTOFError):
    pass


class EmptyBoundary(BTOFError):
    pass


class EmptyValidationSet(BTOFError):
    pass


class NoForegroundSeeds(BTOFError):
    pass


class ClusterCountTooLarge(BTOFError, ValueError):
    pass


class EmptyDataset(BTOFError):
    pass


class ConfigError(BTOFError, ValueError):
    pass
