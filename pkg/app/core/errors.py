class EngineError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class SchemaError(EngineError):
    exit_code = 2


class MeasureError(EngineError):
    exit_code = 2


class ParseError(EngineError):
    exit_code = 2


class ModelError(EngineError):
    exit_code = 2


class CyclicModelError(ModelError):
    pass


class ConditioningUndefined(EngineError):
    exit_code = 3


class MissingKernel(EngineError):
    exit_code = 4
