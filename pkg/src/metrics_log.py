"""interface for the per-step metrics log"""

import csv
import logging
import math
import os

from .train_state import action_step_log_wrap

METRICS_VARNAMES = ["step", "lr", "l_rec", "l_i1", "l_i2", "total"]


class MetricsLog:
    """comma-separated log of per-step training metrics, one row per step"""

    def __init__(self, workdir, train_state, name="metrics", varnames=None):
        self._fname = os.path.join(workdir, name + ".csv")
        self._varnames = list(METRICS_VARNAMES if varnames is None else varnames)
        if self._varnames[0] != "step":
            msg = "first metrics varname must be step, got %s" % self._varnames[0]
            raise ValueError(msg)

        self._create_metrics_file(fname=self._fname, train_state=train_state)

    @property
    def fname(self):
        """name of the metrics file"""
        return self._fname

    @action_step_log_wrap("_create_metrics_file {fname}", per_step=False)
    # pylint: disable=unused-argument
    def _create_metrics_file(self, fname, train_state):
        """create the metrics file, with its header row"""
        with open(fname, mode="w", newline="") as fptr:
            csv.writer(fptr).writerow(self._varnames)

    def put_vars(self, step, name_vals_dict):
        """
        append the row for step
        name_vals_dict is a dict of (varname, val) pairs; missing varnames are empty
        """
        unknown = set(name_vals_dict) - set(self._varnames)
        if unknown:
            msg = "unknown metrics varnames %s" % ",".join(sorted(unknown))
            raise RuntimeError(msg)
        vals = dict(name_vals_dict, step=step)
        row = [_fmt_val(vals.get(varname)) for varname in self._varnames]
        with open(self._fname, mode="a", newline="") as fptr:
            csv.writer(fptr).writerow(row)

    def truncate(self, step):
        """drop rows for steps at or beyond step"""
        logger = logging.getLogger(__name__)
        rows = self.read()
        kept = [row for row in rows if row["step"] < step]
        logger.info(
            "dropping %d rows at or beyond step %d from %s",
            len(rows) - len(kept),
            step,
            self._fname,
        )
        with open(self._fname, mode="w", newline="") as fptr:
            writer = csv.writer(fptr)
            writer.writerow(self._varnames)
            for row in kept:
                writer.writerow([_fmt_val(row[varname]) for varname in self._varnames])

    def read(self):
        """list of rows, as dicts of floats (int for step, None for empty)"""
        with open(self._fname, mode="r", newline="") as fptr:
            reader = csv.DictReader(fptr)
            rows = []
            for row in reader:
                parsed = {
                    key: None if val == "" else float(val) for key, val in row.items()
                }
                parsed["step"] = int(parsed["step"])
                rows.append(parsed)
        return rows


def _fmt_val(val):
    """csv representation of a metrics value, repr keeps floats exact"""
    if val is None:
        return ""
    if isinstance(val, int):
        return str(val)
    val = float(val)
    return repr(val) if math.isfinite(val) else str(val)
