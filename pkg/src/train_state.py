"""class for representing the state of a training run"""

import functools
import json
import logging
import os

from .utils import mkdir_exist_okay


class TrainState:
    """
    latest checkpoint of a training run and a log of completed one-off actions,
    kept in workdir/<name>_state.json and rewritten on every change
    """

    def __init__(self, workdir, name="train", resume=False):
        logger = logging.getLogger(__name__)
        logger.debug('TrainState, name="%s", resume="%r"', name, resume)

        mkdir_exist_okay(workdir)
        self._name = name
        self._state_fname = os.path.join(workdir, name + "_state.json")

        if resume:
            if not os.path.exists(self._state_fname):
                msg = "cannot resume, %s not found" % self._state_fname
                raise FileNotFoundError(msg)
            with open(self._state_fname, mode="r") as fptr:
                self._saved_state = json.load(fptr)
            logger.info(
                '"%s" resumed at step %d, %d logged actions',
                self._name,
                self.get_step(),
                len(self._saved_state["step_log"]),
            )
        else:
            self._saved_state = {"step": 0, "checkpoint_fname": None, "step_log": []}
            self.log_step("__init__", per_step=False)

    def get_step(self):
        """return training step of the latest checkpoint"""
        return self._saved_state["step"]

    def get_checkpoint_fname(self):
        """return name of the latest checkpoint, None if there is none"""
        return self._saved_state["checkpoint_fname"]

    def record_checkpoint(self, step, checkpoint_fname):
        """note that a checkpoint for step was written to checkpoint_fname"""
        self._saved_state["step"] = step
        self._saved_state["checkpoint_fname"] = checkpoint_fname
        self._write_saved_state()

    def log_step(self, stepval, per_step=True):
        """add stepval to step_log, if it is not already there"""
        log_string = self._step_log_string(stepval, per_step)
        if log_string in self._saved_state["step_log"]:
            return
        logging.getLogger(__name__).debug('adding "%s" to step_log', log_string)
        self._saved_state["step_log"].append(log_string)
        self._write_saved_state()

    def step_logged(self, stepval, per_step=True):
        """has stepval been logged, at the current step if per_step"""
        return self._step_log_string(stepval, per_step) in self._saved_state["step_log"]

    def _step_log_string(self, stepval, per_step):
        return "%06d:%s" % (self.get_step(), stepval) if per_step else stepval

    def _write_saved_state(self):
        with open(self._state_fname, mode="w") as fptr:
            json.dump(self._saved_state, fptr, indent=2)


def action_step_log_wrap(step, per_step=True):
    """
    Decorator that runs an action at most once per formatted step name.
    train_state must be passed to func as a keyword argument, and step is
    formatted with func's keyword arguments.
    """

    def outer_wrapper(func):
        @functools.wraps(func)
        def inner_wrapper(*args, **kwargs):
            train_state = kwargs["train_state"]
            stepval = step.format(**kwargs)
            if train_state is not None and train_state.step_logged(stepval, per_step):
                return
            func(*args, **kwargs)
            if train_state is not None:
                train_state.log_step(stepval, per_step)

        return inner_wrapper

    return outer_wrapper
