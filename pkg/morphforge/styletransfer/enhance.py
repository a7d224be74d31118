# morphforge/styletransfer/enhance.py

import logging
from dataclasses import dataclass

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.imagekit.image import Image
from morphforge.styletransfer.loss import (
    LossBreakdown,
    LossConfig,
    loss_and_grad_array,
    style_target,
    style_target_average,
)
from morphforge.styletransfer.net import ConvNet, forward
from morphforge.styletransfer.optimizer import (
    OptimizationResult,
    OptimizerConfig,
    lbfgsb_minimize,
)

logger = logging.getLogger(__name__)


@dataclass
class EnhanceReport:
    result: OptimizationResult
    initial: LossBreakdown
    final: LossBreakdown


def enhance_morph_traced(
    blended: Image,
    orig_a: Image,
    orig_b: Image,
    net: ConvNet,
    loss_cfg: LossConfig,
    opt_cfg: OptimizerConfig,
) -> tuple[Image, EnhanceReport]:
    """enhance_morph that also returns the optimizer trace and loss breakdowns."""
    blended.require_same_shape(orig_a, what="blended morph and original A")
    blended.require_same_shape(orig_b, what="blended morph and original B")
    net.require_layers(loss_cfg.content_layers + loss_cfg.style_layers)

    content = forward(net, blended)
    target = style_target_average(
        style_target(forward(net, orig_a), loss_cfg.style_layers),
        style_target(forward(net, orig_b), loss_cfg.style_layers),
    )
    shape = blended.data.shape

    def objective(x: FloatArray) -> tuple[float, FloatArray]:
        value, grad, _ = loss_and_grad_array(net, x.reshape(shape), content, target, loss_cfg)
        return value, grad.ravel()

    _, _, initial = loss_and_grad_array(net, blended.data, content, target, loss_cfg)
    result = lbfgsb_minimize(objective, blended.data.ravel(), opt_cfg)
    if result.iterations == 0 and not result.clamped:
        enhanced = blended
        final = initial
    else:
        enhanced = Image(result.x.reshape(shape))
        _, _, final = loss_and_grad_array(net, enhanced.data, content, target, loss_cfg)

    logger.info(
        f"Enhanced {blended.width}x{blended.height} morph: {result.iterations} iterations "
        f"({result.reason}), loss {result.initial_loss:.6e} -> {result.final_loss:.6e}, "
        f"style {initial.style_total:.6e} -> {final.style_total:.6e}"
    )
    return enhanced, EnhanceReport(result=result, initial=initial, final=final)


def enhance_morph(
    blended: Image,
    orig_a: Image,
    orig_b: Image,
    net: ConvNet,
    loss_cfg: LossConfig,
    opt_cfg: OptimizerConfig,
) -> Image:
    """Pull the blended morph toward the averaged style of both originals.

    Content comes from the blended image itself, the style target is the mean
    Gram matrices of the two originals, and the optimization starts at the
    blended image inside the [0, 1] box.
    """
    enhanced, _ = enhance_morph_traced(blended, orig_a, orig_b, net, loss_cfg, opt_cfg)
    return enhanced


def difference_image(a: Image, b: Image, gain: float = 4.0) -> Image:
    """0.5 + gain * (a - b), clamped; mid-gray where the images agree."""
    a.require_same_shape(b, what="difference operands")
    return Image(np.clip(0.5 + gain * (a.data - b.data), 0.0, 1.0))
