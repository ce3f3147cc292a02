"""nonlocal-lab: NS-box correlations, the van Dam oblivious-transfer
channel, and Fisher-information regime analysis at desk scale."""

__version__ = "0.1.0"

from .channel import (  # noqa: F401
    BernoulliSource,
    PairedSamples,
    SymmetricBinaryChannel,
    concatenate,
    draw_source,
    empirical_correlation,
    independence_statistic,
    transmit,
)
from .exact import enumerate_exact  # noqa: F401
from .harness import ExperimentConfig, ResultTable, emit_table, run_experiment  # noqa: F401
from .inference import (  # noqa: F401
    FisherQuery,
    FisherReport,
    MLEResult,
    Regime,
    classify_regime,
    clt_suite,
    empirical_fisher,
    fisher_binary,
    fisher_symmetric,
    fisher_vandam,
    mle_theta,
)
from .nsbox import (  # noqa: F401
    BoxInput,
    BoxOutcome,
    NSBoxPair,
    chsh_correlation,
    make_isotropic_box,
    no_signaling_check,
    sample_box,
)
from .vandam import (  # noqa: F401
    Address,
    BoxTree,
    ProtocolTranscript,
    VanDamConfig,
    alice_encode,
    bob_decode,
    run_protocol,
)
