"""Exception types raised across the package."""


class NetcorrError(Exception):
    """Base class for all package errors."""


class InputError(NetcorrError, ValueError):
    """Malformed or inconsistent user input (files, labels, arguments)."""


class StatisticError(NetcorrError, ValueError):
    """A statistic is undefined for the given data or weights."""


class ConstantDataError(StatisticError):
    def __init__(self, msg="constant data"):
        super().__init__(msg)


class EmptyWeightsError(StatisticError):
    def __init__(self, msg="empty weight matrix"):
        super().__init__(msg)


class NetworkVarianceError(StatisticError):
    def __init__(self, msg="network variance not positive"):
        super().__init__(msg)


class GraphNotRewireableError(NetcorrError, RuntimeError):
    def __init__(self, msg="graph not rewireable"):
        super().__init__(msg)


class FetchError(NetcorrError, RuntimeError):
    """Remote wiki request failed after retries."""


class PageNotFoundError(FetchError):
    def __init__(self, title):
        super().__init__(f"page not found: {title!r}")
        self.title = title
