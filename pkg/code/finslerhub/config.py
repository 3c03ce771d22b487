import os
import re
from pathlib import Path
from typing import Optional

import yaml

DEFAULT_SEED = 42


def parse_config(config_path: Path, tag: str = "!ENV"):
    """
    Load a yaml configuration file and resolve any environment variables
    The environment variables must have !ENV before them and be in this format
    to be parsed: ${VAR_NAME}.

    E.g.:

    RUN:
        seed: !ENV ${GABMETRICS_SEED}
    OUTPUT:
        directory: !ENV '${HOME}/gabmetrics/${RUN_NAME}'

    :param config_path: the path to the yaml file
    :param tag: the tag to look for
    :return: the dict configuration
    """
    # pattern for global vars: look for ${word}
    pattern = re.compile(r".*?\${(\w+)}.*?")
    loader = yaml.SafeLoader

    # the tag will be used to mark where to start searching for the pattern
    # e.g. somekey: !ENV somestring${MYENVVAR}blah blah blah
    loader.add_implicit_resolver(tag, pattern, None)

    def constructor_env_variables(loader, node):
        """
        Extracts the environment variable from the node's value
        :param yaml.Loader loader: the yaml loader
        :param node: the current node in the yaml
        :return: the parsed string that contains the value of the environment
        variable
        """
        value = loader.construct_scalar(node)
        match = pattern.findall(value)  # to find all env variables in line
        if match:
            full_value = value
            for g in match:
                full_value = full_value.replace(f"${{{g}}}", os.environ.get(g, ""))
            return full_value
        return value

    loader.add_constructor(tag, constructor_env_variables)

    with config_path.open("r", encoding="utf-8") as conf_data:
        return yaml.load(conf_data, Loader=loader)


def _merge(base: dict, update: dict):
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value


class Config(dict):
    """Numerical defaults for every gabmetrics command. Values come from the packaged
    config.yaml, optionally overlaid section by section with an extra file."""

    def __init__(self, extra_config: Optional[Path] = None):
        super(Config, self).__init__()

        config_path = Path(__file__).parent / "config.yaml"

        self.update(parse_config(config_path))
        if extra_config is not None:
            _merge(self, parse_config(extra_config) or {})

        self.post_load_hook()

    def post_load_hook(self):
        """Hook that implementations can override to alter the configuration after the
        config files are loaded"""
        ...

    @property
    def FD_STEP(self) -> float:
        return float(self["NUMERICS"]["fd_step"])

    @property
    def FD_RICHARDSON_RTOL(self) -> float:
        return float(self["NUMERICS"]["fd_richardson_rtol"])

    @property
    def QUADRATURE_NODES(self) -> int:
        return int(self["NUMERICS"]["quadrature_nodes"])

    @property
    def VALIDITY_GRID(self) -> int:
        return int(self["VALIDITY"]["grid"])

    @property
    def FLAT_TOL_CLOSED(self) -> float:
        """projective residual below which a closed-form spray counts as flat"""
        return float(self["SPRAY"]["flat_tol_closed"])

    @property
    def FLAT_TOL_FD(self) -> float:
        return float(self["SPRAY"]["flat_tol_fd"])

    @property
    def PDE_PRECONDITION_TOL(self) -> float:
        return float(self["SPRAY"]["pde_precondition_tol"])

    @property
    def GEODESIC_STEPS(self) -> int:
        return int(self["GEODESIC"]["steps"])

    @property
    def GEODESIC_H(self) -> float:
        return float(self["GEODESIC"]["h"])

    @property
    def BALL_MARGIN(self) -> float:
        return float(self["GEODESIC"]["ball_margin"])

    @property
    def DRIFT_LIMIT(self) -> float:
        return float(self["GEODESIC"]["drift_limit"])

    @property
    def STRAIGHT_TOL(self) -> float:
        """max straightness residual for the flat verdict of a sweep"""
        return float(self["GEODESIC"]["straight_tol"])

    @property
    def PDE_GRID(self) -> int:
        return int(self["PDE"]["grid"])

    @property
    def PDE_INTERIOR_MARGIN(self) -> float:
        return float(self["PDE"]["interior_margin"])

    @property
    def PDE_TOL(self) -> float:
        return float(self["PDE"]["tol"])

    @property
    def SEED(self) -> int:
        seed = self["RUN"].get("seed")
        if seed in (None, ""):
            return DEFAULT_SEED
        return int(seed)

    @property
    def SAMPLES(self) -> int:
        return int(self["RUN"]["samples"])

    @property
    def CSV_FLOAT_FORMAT(self) -> str:
        return self["OUTPUT"]["csv_float_format"]
