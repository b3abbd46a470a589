"""Organization model and mission planner for reconfigurable multi-robot systems."""
from .agents import (
    AtomicAgent,
    CoalitionStructure,
    GeneralAgent,
    GeneralAgentType,
    Role,
    connection_feasible,
    enumerate_dormant_types,
    instantiate,
    parse_type_spec,
    type_of,
    union_types,
)
from .capability import (
    efficacy_cs,
    efficacy_type,
    has_functionality,
    support_functionality,
    support_resource,
    support_set,
)
from .ontology import (
    ResourceModel,
    card_max,
    card_min,
    is_instance_of,
    load_model,
    load_model_file,
    resolve_property,
)
from .policies import eval_policy, inverse_policy, ocost, pvalue_composite
from .reconfig import ReconfigParams, formation_cost, transition_cost
from .csg import CsgBudget, enumerate_structures, find_feasible_structure
from .reliability import (
    available_cardinalities,
    monte_carlo_reliability,
    reliability,
    reliability_cs,
    required_cardinalities,
    rsub,
)

__version__ = "0.1.0"
