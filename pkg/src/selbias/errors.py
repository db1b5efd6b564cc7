"""Exception hierarchy; every error names the module it came from."""


class SelbiasError(ValueError):
    module = "selbias"

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class DataError(SelbiasError):
    module = "data"


class ClassifierError(SelbiasError):
    module = "classifiers"


class SelectionError(SelbiasError):
    module = "selection"


class CVError(SelbiasError):
    module = "cv_engine"


class OracleError(SelbiasError):
    module = "oracle"


class ConfigError(SelbiasError):
    module = "runner"
