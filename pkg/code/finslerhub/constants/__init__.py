from finslerhub.constants.enums import (  # noqa: F401
    AlphaKind,
    BetaKind,
    IntegrationMethod,
    PhiKind,
    SprayMethod,
    Verdict,
)
