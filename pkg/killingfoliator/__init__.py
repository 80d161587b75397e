import killingfoliator.kf_core
import killingfoliator.kf_expr
import killingfoliator.kf_fields
import killingfoliator.kf_lie
import killingfoliator.kf_flow
import killingfoliator.kf_orbit
import killingfoliator.kf_classify
import killingfoliator.kf_verify
import killingfoliator.kf_helpers

from killingfoliator.kf_config import __version__
