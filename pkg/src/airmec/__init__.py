"""UAV-assisted edge computing simulation suite.

Pipeline: seeded scenario generation, RSSI sensing, learned iterative
localization of user clusters, queueing-based serving-UAV allocation, and an
event-driven task-offloading simulation with SLA accounting, plus grid and
random placement baselines and an experiment harness.
"""

__version__ = "0.1.0"

from .scenario import (ArenaConfig, AttractionPoint, GenerationError, Scenario,
                       TaskProfile, User, default_config, generate_scenario,
                       load_scenario, save_scenario)
from .radio import RadioParams, channel_gain, cumulative_rssi, in_coverage, \
    transmission_delay
from .queueing import (CapacityExceededError, DelayBreakdown, ServingSpec,
                       local_delay, max_users_per_uav, mm1_queueing_delay,
                       mm1_sojourn, mm1_total_delay, total_task_delay,
                       uav_service_time)
from .rl_env import Action, AgentState, DetectorEnv, EnvParams
from .dqn import (QNetwork, ReplayBuffer, TrainConfig, episodes_to_plateau,
                  q_values, select_action, td_target, train_agent, train_step)
from .localization import (DetectorReport, LocalizationCapError,
                           LocalizationResult, find_locations, run_iteration)
from .allocation import (AreaDemand, DeploymentPlan, InfeasibleProfileError,
                         ServingUav, compute_demands, deploy, required_uavs)
from .mec_sim import RunMetrics, TaskInstance, UavQueueState, choose_uav, simulate
from .baselines import PlacementMethod, cf_centers, place_and_connect, \
    random_centers
from .harness import ExperimentSpec, ResultTable, emit, run_experiment, run_methods
from .config import Settings, default_settings, load_settings
