from enum import Enum


class _strEnum(Enum):
    def __str__(self) -> str:
        return self.value


class PhiKind(_strEnum):
    CONSTANT: str = "constant"
    RANDERS: str = "randers"
    BERWALD_SQUARE: str = "berwald_square"
    # (1+s)², the classical square metric; not a solution of the flatness PDE
    CLASSICAL_SQUARE: str = "one_plus_s_squared"
    BRYANT: str = "bryant"
    LEMMA_C: str = "lemma_c"
    MU_TRANSFORMED: str = "mu_transformed"
    HOMOTOPY: str = "homotopy"


class AlphaKind(_strEnum):
    CONST_CURVATURE: str = "const_curvature"
    EXPLICIT: str = "explicit"


class BetaKind(_strEnum):
    CONFORMAL: str = "conformal"
    AFFINE: str = "affine"
    EXPLICIT: str = "explicit"


class SprayMethod(_strEnum):
    CLOSED: str = "closed"
    CONFORMAL: str = "conformal"
    FD_ORACLE: str = "fd_oracle"


class IntegrationMethod(_strEnum):
    CLOSED_FORM: str = "closed_form"
    FD_ORACLE: str = "fd_oracle"

    @property
    def spray_method(self) -> SprayMethod:
        if self == IntegrationMethod.CLOSED_FORM:
            return SprayMethod.CLOSED
        return SprayMethod.FD_ORACLE


class Verdict(_strEnum):
    FLAT: str = "projectively flat at tested scale"
    NOT_FLAT: str = "not projectively flat"

    @property
    def is_flat(self) -> bool:
        return self == Verdict.FLAT
