"""FPT approximation algorithms for metric clustering, with exact oracles and gadget generators."""
from .baseline import approximation_ratio, brute_force_opt, nonbipartite_solve
from .coreset import CoresetParams, WeightedClientSet, build_coreset, coreset_error
from .errors import BudgetExceeded, DegenerateMetric, InstanceError, TooLargeError
from .metric import MetricInstance, Solution, cost, load_instance, random_instance, validate_metric
from .solver import (FLInstance, find_centers, solve_facility_location, solve_kmeans,
                     solve_matroid_median)

__version__ = "0.1.0"
