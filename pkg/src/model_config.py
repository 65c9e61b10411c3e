"""class to hold model configuration info"""

import copy
import logging
from os.path import dirname, join, realpath

import yaml

# spatial upscaling factor, fixed by the reconstruction network
MODEL_SCALE = 4

INTERP_KINDS = ["naive", "deformable"]
AGGREGATIONS = ["none", "convlstm", "dconvlstm"]

# fields of ModelConfig, in header order, with their defaults
MODEL_CONFIG_DEFAULTS = {
    "variant": "f",
    "k1": 5,
    "k2": 40,
    "k3": 5,
    "channels": 64,
    "scale": MODEL_SCALE,
    "pcd_levels": 1,
    "deformable_groups": 8,
}


def default_variant_defs_fname():
    """return name of variant_defs.yaml shipped with the repo"""
    repo_root = dirname(dirname(realpath(__file__)))
    return join(repo_root, "input", "zsm", "variant_defs.yaml")


def load_variant_defs(fname=None, lvl=logging.DEBUG):
    """read and vet variant definitions from a yaml file"""
    logger = logging.getLogger(__name__)
    if fname is None:
        fname = default_variant_defs_fname()
    logger.log(lvl, "loading variant defs from %s", fname)
    with open(fname, mode="r") as fptr:
        file_contents = yaml.safe_load(fptr)
    variant_defs = file_contents["variant_defs"]
    check_variant_defs(variant_defs)
    return variant_defs


class ModelConfig:
    """class to hold model configuration info"""

    def __init__(self, variant_defs=None, **kwargs):
        unknown = set(kwargs) - set(MODEL_CONFIG_DEFAULTS)
        if unknown:
            msg = "unknown ModelConfig fields %s" % ",".join(sorted(unknown))
            raise ValueError(msg)
        vals = dict(MODEL_CONFIG_DEFAULTS, **kwargs)

        self.variant = str(vals["variant"])
        for key in ["k1", "k2", "k3", "channels", "scale"]:
            setattr(self, key, _as_int(key, vals[key]))
        self.pcd_levels = _as_int("pcd_levels", vals["pcd_levels"])
        self.deformable_groups = _as_int(
            "deformable_groups", vals["deformable_groups"]
        )

        if variant_defs is None:
            variant_defs = load_variant_defs()
        if self.variant not in variant_defs:
            msg = "unknown variant %s, expected one of %s" % (
                self.variant,
                ",".join(variant_defs),
            )
            raise ValueError(msg)
        self.variant_def = copy.deepcopy(variant_defs[self.variant])

        check_model_config_vals(self)

    @classmethod
    def from_dict(cls, vals, variant_defs=None):
        """construct from a dict of field values, e.g., a cfg section or header"""
        kwargs = {key: vals[key] for key in MODEL_CONFIG_DEFAULTS if key in vals}
        return cls(variant_defs=variant_defs, **kwargs)

    @classmethod
    def from_modelinfo(cls, modelinfo, lvl=logging.DEBUG):
        """construct from the modelinfo section of a cfg file"""
        variant_defs = load_variant_defs(modelinfo.get("variant_defs_fname"), lvl)
        return cls.from_dict(modelinfo, variant_defs)

    def to_dict(self):
        """field values, in header order"""
        return {key: getattr(self, key) for key in MODEL_CONFIG_DEFAULTS}

    def __eq__(self, other):
        if not isinstance(other, ModelConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        vals = ", ".join("%s=%r" % item for item in self.to_dict().items())
        return "ModelConfig(%s)" % vals

    @property
    def interp(self):
        """feature interpolation kind"""
        return self.variant_def["interp"]

    @property
    def aggregation(self):
        """sequence aggregation kind"""
        return self.variant_def["aggregation"]

    @property
    def bidirectional(self):
        """is aggregation run in both directions"""
        return self.variant_def["bidirectional"]

    @property
    def lr_synthesis(self):
        """does the model have the LR synthesis head"""
        return self.variant_def["lr_synthesis"]

    @property
    def pad_multiple(self):
        """LR spatial dims must be multiples of this"""
        return 2 ** (self.pcd_levels - 1)


def _as_int(key, val):
    """convert val to int, raising ValueError naming key on failure"""
    try:
        return int(val)
    except (TypeError, ValueError):
        msg = "%s must be an integer, got %s" % (key, val)
        raise ValueError(msg) from None


def check_model_config_vals(model_config):
    """Perform basic vetting of ModelConfig field values"""
    for key in ["k1", "k2", "k3"]:
        if getattr(model_config, key) < 0:
            msg = "%s must be non-negative, got %d" % (key, getattr(model_config, key))
            raise ValueError(msg)
    if model_config.scale != MODEL_SCALE:
        msg = "scale must be %d, got %d" % (MODEL_SCALE, model_config.scale)
        raise ValueError(msg)
    if model_config.channels < 1:
        msg = "channels must be positive, got %d" % model_config.channels
        raise ValueError(msg)
    if model_config.pcd_levels < 1:
        msg = "pcd_levels must be positive, got %d" % model_config.pcd_levels
        raise ValueError(msg)
    groups = model_config.deformable_groups
    if groups < 1 or model_config.channels % groups != 0:
        msg = "channels %d not divisible by deformable_groups %d" % (
            model_config.channels,
            groups,
        )
        raise ValueError(msg)


def check_variant_defs(variant_defs):
    """Perform basic vetting of variant_defs"""
    # This check is done for all entries in variant_defs,
    # whether they are being used or not.
    logger = logging.getLogger(__name__)
    for variant, variant_def in variant_defs.items():
        logger.debug("checking variant_def for %s", variant)
        for key in ["description", "interp", "aggregation"]:
            if key not in variant_def:
                msg = "variant %s missing %s" % (variant, key)
                raise ValueError(msg)
        if variant_def["interp"] not in INTERP_KINDS:
            msg = "unknown interp=%s in variant %s" % (variant_def["interp"], variant)
            raise ValueError(msg)
        if variant_def["aggregation"] not in AGGREGATIONS:
            msg = "unknown aggregation=%s in variant %s" % (
                variant_def["aggregation"],
                variant,
            )
            raise ValueError(msg)
        for key in ["bidirectional", "lr_synthesis"]:
            variant_def.setdefault(key, False)
            if not isinstance(variant_def[key], bool):
                msg = "%s in variant %s must be true or false" % (key, variant)
                raise ValueError(msg)
        if variant_def["bidirectional"] and variant_def["aggregation"] == "none":
            msg = "variant %s is bidirectional without aggregation" % variant
            raise ValueError(msg)
