"""Per-view attention pipeline: saliency + backprojection -> conspicuity.

Bundles everything the planner needs to process a failed look's image:
the filter bank, the target's color histogram, density settings and the
fusion weights.  The output of `conspicuity_for_view` is the combined
conspicuity map and the saliency mask restricting which pixels may
reshape the belief.
"""

from dataclasses import dataclass

from .backprojection import backproject, combine_conspicuity
from .saliency import DensityConfig, aim_saliency, percentile_mask


@dataclass(frozen=True)
class AttentionContext:
    filter_bank: object
    histogram: object
    density: DensityConfig = None
    percentile: float = 80.0
    w_aim: float = 0.4
    w_hb: float = 0.6

    def __post_init__(self):
        if self.density is None:
            object.__setattr__(self, "density", DensityConfig())


def conspicuity_for_view(view, ctx):
    """Conspicuity map and saliency mask for one rendered view."""
    info = aim_saliency(view.rgb, ctx.filter_bank, ctx.density)
    mask = percentile_mask(info, ctx.percentile)
    hb = backproject(view.rgb, ctx.histogram, mask=mask)
    consp = combine_conspicuity(info, hb, w_aim=ctx.w_aim, w_hb=ctx.w_hb)
    return consp, mask
