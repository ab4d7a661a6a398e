class McidError(Exception):
    """Базовая ошибка пакета."""
    exit_code = 1


class InputError(McidError):
    """Ошибка во входных данных или параметрах (код выхода 2)."""
    exit_code = 2


class NumericalError(McidError):
    """Численная ошибка при оценивании (код выхода 1)."""
    exit_code = 1


class EmptyDatasetError(InputError):
    """Ошибка: пустой набор данных."""
    pass


class MixedCovariateDimError(InputError):
    """Ошибка: у наблюдений разная размерность ковариат."""
    pass


class NonBinaryLabelError(InputError):
    """Ошибка: метка исхода не из {-1, +1}."""
    pass


class NonFiniteValueError(InputError):
    """Ошибка: NaN или бесконечность в данных."""
    pass


class BadSplitSizeError(InputError):
    """Ошибка: недопустимый размер обучающей выборки."""
    pass


class BadWeightError(InputError):
    """Ошибка: вес w вне интервала (0, 1)."""
    pass


class BadParameterError(InputError):
    """Ошибка: параметр метода вне допустимого диапазона."""
    pass


class EmptyNegativeClassError(InputError):
    """Ошибка: нет ни одного наблюдения с y = -1."""
    pass


class DimensionMismatchError(InputError):
    """Ошибка: несогласованные размерности."""
    pass


class DegenerateCovariatesError(InputError):
    """Ошибка: все векторы ковариат совпадают."""
    pass


class UnknownLossError(InputError):
    """Ошибка: неизвестная функция потерь."""
    pass


class CsvFormatError(InputError):
    """Ошибка разбора CSV с номером строки."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"строка {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class ModelFormatError(InputError):
    """Ошибка: файл модели повреждён или другой версии."""
    pass


class QuadratureError(NumericalError):
    """Ошибка: квадратура не достигла заданной точности."""
    pass


class NoBracketFoundError(NumericalError):
    """Ошибка: минимум риска на краю сетки поиска."""
    pass


class RootNotBracketedError(NumericalError):
    """Ошибка: уравнение p(c) = 1 - w не имеет корня на отрезке."""
    pass


class InnerSolverError(NumericalError):
    """Ошибка внутреннего выпуклого решателя."""
    pass


class NonDecreasingObjectiveError(NumericalError):
    """Ошибка: целевая функция DCA выросла сверх допуска."""
    pass


class DegenerateFoldError(NumericalError):
    """Ошибка: фолд кросс-валидации содержит один класс."""
    pass


class MaxItersExceededWarning(RuntimeWarning):
    """Внутренний решатель исчерпал лимит итераций, взят лучший итерат."""
    pass
