"""training objectives: HR reconstruction and cyclic interpolation losses"""

from dataclasses import dataclass

from .core_ops import CHARBONNIER_EPS, charbonnier

# names of the loss components, in metrics log order
LOSS_TERMS = ["l_rec", "l_i1", "l_i2"]


@dataclass
class LossWeights:
    """weights of reconstruction, first-order and second-order cyclic losses"""

    lambda1: float = 1.0
    lambda2: float = 0.1
    lambda3: float = 0.05

    def __post_init__(self):
        if self.lambda1 <= 0.0:
            msg = "lambda1 must be positive, got %s" % self.lambda1
            raise ValueError(msg)
        if self.lambda2 < 0.0 or self.lambda3 < 0.0:
            msg = "lambda2, lambda3 must be non-negative, got %s, %s" % (
                self.lambda2,
                self.lambda3,
            )
            raise ValueError(msg)


def _check_frames(name, frames, frame_dim=1):
    if frames.dim() != 5:
        msg = "%s must have shape (B, T, 3, H, W), not %s" % (
            name,
            tuple(frames.shape),
        )
        raise ValueError(msg)
    return frames.shape[frame_dim]


def reconstruction_loss(pred_hr, gt_hr, eps=CHARBONNIER_EPS):
    """mean over frames of charbonnier(pred, gt)"""
    _check_frames("pred_hr", pred_hr)
    if pred_hr.shape != gt_hr.shape:
        msg = "pred_hr shape %s != gt_hr shape %s" % (
            tuple(pred_hr.shape),
            tuple(gt_hr.shape),
        )
        raise ValueError(msg)
    frame_cnt = pred_hr.shape[1]
    per_frame = [
        charbonnier(pred_hr[:, ind], gt_hr[:, ind], eps) for ind in range(frame_cnt)
    ]
    return sum(per_frame) / frame_cnt


def cyclic_loss_first_order(interp_features, gt_lr, rho, eps=CHARBONNIER_EPS):
    """
    synthesized intermediate features, mapped to LR frames by rho, against the
    ground-truth LR frames they stand for

    gt_lr holds all 2n+1 LR frames; feature t is compared with gt_lr[:, 2t+1].
    """
    frame_cnt = _check_frames("gt_lr", gt_lr)
    if frame_cnt != 2 * len(interp_features) + 1:
        msg = "%d interpolated features need %d gt_lr frames, got %d" % (
            len(interp_features),
            2 * len(interp_features) + 1,
            frame_cnt,
        )
        raise ValueError(msg)
    terms = [
        charbonnier(rho(feat), gt_lr[:, 2 * ind + 1], eps)
        for ind, feat in enumerate(interp_features)
    ]
    return sum(terms) / len(terms)


def cyclic_loss_second_order(interp_features, gt_lr, interp, rho, eps=CHARBONNIER_EPS):
    """
    features re-interpolated between consecutive synthesized features, mapped to
    LR frames by rho, against the original LR frames between them

    Returns (loss, degenerate); with fewer than 2 synthesized features no pairs
    exist, the loss is 0 and degenerate is True.
    """
    frame_cnt = _check_frames("gt_lr", gt_lr)
    if frame_cnt != 2 * len(interp_features) + 1:
        msg = "%d interpolated features need %d gt_lr frames, got %d" % (
            len(interp_features),
            2 * len(interp_features) + 1,
            frame_cnt,
        )
        raise ValueError(msg)
    if len(interp_features) < 2:
        return gt_lr.new_zeros(()), True
    terms = []
    for ind in range(len(interp_features) - 1):
        feat = interp(interp_features[ind], interp_features[ind + 1])
        terms.append(charbonnier(rho(feat), gt_lr[:, 2 * ind + 2], eps))
    return sum(terms) / len(terms), False


def total_loss(l_rec, l_i1, l_i2, weights):
    """weighted sum of the loss components"""
    return weights.lambda1 * l_rec + weights.lambda2 * l_i1 + weights.lambda3 * l_i2
