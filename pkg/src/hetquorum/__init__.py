"""Heterogeneous-trust fault tolerance.

Principals and integrity/availability labels, trust configurations and
their requirement checks, a fast-consensus participant, a deterministic
simulator, threshold synthesis, and label-threshold ordered broadcast.
"""

from .principal import (BOTTOM, TOP, Delegations, Principal, acts_for, conj_of,
                        disj_of, parse_principal, threshold)
from .label import (AVAILABILITY, INTEGRITY, Label, Policy, flows_to, join, meet,
                    parse_label, policy)
from .config import CapacityError, TrustConfig, homogeneous_config
from .trust import FailureModel, liar_sets, crash_sets, decider_sets, wrong_sets
from .requirements import FailureAssignment, Role, check_all, classify, gurus, passes
from .engine import ParticipantState
from .simnet import SimConfig, run_experiment, run_trial
from .search import synthesize
from .oarcast import (OarcastConfig, check_oarcast_liveness, check_oarcast_safety,
                      homogeneous_oarcast, run_oarcast_experiment)
from .scenario import Scenario, bundled, load_scenario, parse_scenario, serialize_scenario

__version__ = "0.1.0"
