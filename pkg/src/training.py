"""optimization loop: Adam, per-step cosine-annealed learning rate, checkpointing"""

import logging
import math
import os
from dataclasses import dataclass, field

import torch

from .checkpoint import (
    checkpoint_from_model,
    load_checkpoint,
    load_params_into,
    restore_optimizer_state,
    save_checkpoint,
)
from .clip_dataset import TrainingSampleSet, make_data_loader
from .degradation import DegradationSpec
from .losses import (
    LOSS_TERMS,
    LossWeights,
    cyclic_loss_first_order,
    cyclic_loss_second_order,
    reconstruction_loss,
    total_loss,
)
from .metrics_log import MetricsLog
from .train_state import TrainState
from .zsm_model import ZoomingSlowMo

CHECKPOINT_FNAME_FMT = "checkpoint_%06d.ckpt"
ADAM_BETAS = (0.9, 0.999)


class NonFiniteLossError(RuntimeError):
    """raised when a loss term evaluates to inf or nan"""

    def __init__(self, step, terms):
        self.step = step
        self.terms = terms
        msg = "non-finite loss at step %d in %s" % (step, ",".join(terms))
        super().__init__(msg)


@dataclass
class TrainConfig:
    """settings of a training run"""

    total_steps: int = 2000
    batch_size: int = 4
    lr_max: float = 4.0e-4
    lr_min: float = 1.0e-7
    loss_weights: LossWeights = field(default_factory=LossWeights)
    degradation: DegradationSpec = field(default_factory=DegradationSpec)
    seed: int = 0
    checkpoint_interval: int = 500
    log_interval: int = 10
    crop_size: int = 128
    augment: bool = True
    grad_clip: float = 10.0
    gfi_on_degraded: bool = False
    num_workers: int = 0
    device: str = "cpu"

    def __post_init__(self):
        if not self.lr_max > self.lr_min > 0.0:
            msg = "need lr_max > lr_min > 0, got %s, %s" % (self.lr_max, self.lr_min)
            raise ValueError(msg)
        for key in ["total_steps", "batch_size", "checkpoint_interval", "log_interval"]:
            if getattr(self, key) < 1:
                msg = "%s must be positive, got %s" % (key, getattr(self, key))
                raise ValueError(msg)
        if self.grad_clip <= 0.0:
            msg = "grad_clip must be positive, got %s" % self.grad_clip
            raise ValueError(msg)


def cosine_lr(step, total, lr_max, lr_min):
    """cosine annealing from lr_max at step 0 to lr_min at step total"""
    if step < 0:
        msg = "step must be non-negative, got %d" % step
        raise ValueError(msg)
    if step >= total:
        return lr_min
    if step == 0:
        return lr_max
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * step / total))


def effective_loss_weights(train_config):
    """loss weights, with the cyclic terms off for degraded inputs unless requested"""
    logger = logging.getLogger(__name__)
    weights = train_config.loss_weights
    if train_config.degradation.is_clean or train_config.gfi_on_degraded:
        return weights
    logger.info(
        "inputs degraded by %s, turning cyclic interpolation losses off",
        train_config.degradation,
    )
    return LossWeights(weights.lambda1, 0.0, 0.0)


def compute_losses(model, lr_inputs, hr_targets, lr_targets, weights):
    """dict of loss terms and their weighted total for one batch"""
    hr_pred, interp_features = model(lr_inputs)
    vals = {"l_rec": reconstruction_loss(hr_pred, hr_targets)}
    if model.lr_synthesizer is not None:
        vals["l_i1"] = cyclic_loss_first_order(
            interp_features, lr_targets, model.lr_synthesizer
        )
        vals["l_i2"], _ = cyclic_loss_second_order(
            interp_features, lr_targets, model.interp, model.lr_synthesizer
        )
    else:
        vals["l_i1"] = hr_pred.new_zeros(())
        vals["l_i2"] = hr_pred.new_zeros(())
    vals["total"] = total_loss(vals["l_rec"], vals["l_i1"], vals["l_i2"], weights)
    return vals


class Trainer:
    """
    class for training a ZoomingSlowMo model on clips, with state kept in workdir
    so that an interrupted run can be resumed from its latest checkpoint
    """

    def __init__(self, model_config, train_config, clips, workdir, resume=False):
        """initialize trainer"""
        logger = logging.getLogger(__name__)
        logger.debug('Trainer, workdir="%s", resume="%r"', workdir, resume)

        self._train_config = train_config
        self._workdir = workdir
        self._train_state = TrainState(workdir, resume=resume)
        self._metrics_log = MetricsLog(workdir, train_state=self._train_state)

        torch.manual_seed(train_config.seed)
        self.model = ZoomingSlowMo(model_config).to(train_config.device)
        self.optimizer = torch.optim.Adam(
            self.model.parameters(),
            lr=train_config.lr_max,
            betas=ADAM_BETAS,
            weight_decay=0.0,
        )

        self._step = 0
        ckpt_fname = self._train_state.get_checkpoint_fname()
        if resume and ckpt_fname is not None:
            ckpt = load_checkpoint(ckpt_fname)
            if ckpt.config != model_config:
                msg = "checkpoint config %r != run config %r" % (
                    ckpt.config,
                    model_config,
                )
                raise ValueError(msg)
            load_params_into(self.model, ckpt)
            restore_optimizer_state(self.optimizer, self.model, ckpt)
            self._step = ckpt.step
            logger.info("resuming from %s at step %d", ckpt_fname, self._step)
        self._metrics_log.truncate(self._step)

        self._loss_weights = effective_loss_weights(train_config)

        batch_size = train_config.batch_size
        sample_set = TrainingSampleSet(
            clips,
            train_config.seed,
            sample_cnt=max(train_config.total_steps - self._step, 0) * batch_size,
            first_sample=self._step * batch_size,
            crop_size=train_config.crop_size,
            scale=model_config.scale,
            augment_on=train_config.augment,
            degradation=train_config.degradation,
        )
        loader = make_data_loader(sample_set, batch_size, train_config.num_workers)
        self._batches = iter(loader)

    def get_step(self):
        """return number of completed optimizer steps"""
        return self._step

    def done(self):
        """have all steps been taken"""
        return self._step >= self._train_config.total_steps

    def step(self):
        """take one optimizer step, return dict of loss values and lr"""
        cfg = self._train_config
        lr = cosine_lr(self._step, cfg.total_steps, cfg.lr_max, cfg.lr_min)
        for group in self.optimizer.param_groups:
            group["lr"] = lr

        lr_inputs, hr_targets, lr_targets = (
            tensor.to(cfg.device) for tensor in next(self._batches)
        )
        self.optimizer.zero_grad()
        loss_vals = compute_losses(
            self.model, lr_inputs, hr_targets, lr_targets, self._loss_weights
        )
        bad_terms = [
            term
            for term in LOSS_TERMS
            if not torch.isfinite(loss_vals[term].detach()).item()
        ]
        if bad_terms:
            raise NonFiniteLossError(self._step, bad_terms)
        loss_vals["total"].backward()
        torch.nn.utils.clip_grad_norm_(self.model.parameters(), cfg.grad_clip)
        self.optimizer.step()

        vals = {key: val.item() for key, val in loss_vals.items()}
        vals["lr"] = lr
        self._metrics_log.put_vars(self._step, vals)
        if self._step % cfg.log_interval == 0:
            self.log(vals)
        self._step += 1

        if self._step % cfg.checkpoint_interval == 0 or self.done():
            self.write_checkpoint()
        return vals

    def log(self, vals):
        """write loss values of a step to the log"""
        logger = logging.getLogger(__name__)
        logger.info(
            "step=%06d,lr=%.3e,l_rec=%.6f,l_i1=%.6f,l_i2=%.6f,total=%.6f",
            self._step,
            vals["lr"],
            vals["l_rec"],
            vals["l_i1"],
            vals["l_i2"],
            vals["total"],
        )

    def checkpoint(self):
        """Checkpoint of the current model and optimizer state"""
        return checkpoint_from_model(self.model, self._step, self.optimizer)

    def write_checkpoint(self):
        """write a checkpoint for the current step, record it in the train state"""
        fname = os.path.join(self._workdir, CHECKPOINT_FNAME_FMT % self._step)
        save_checkpoint(fname, self.checkpoint())
        self._train_state.record_checkpoint(self._step, fname)
        return fname

    def run(self):
        """step until done, return the final Checkpoint"""
        while not self.done():
            self.step()
        return self.checkpoint()


def train(model_config, train_config, clips, workdir, resume=False):
    """train a model on clips, return the final Checkpoint"""
    if len(clips) == 0:
        msg = "no training clips"
        raise ValueError(msg)
    return Trainer(model_config, train_config, clips, workdir, resume).run()
