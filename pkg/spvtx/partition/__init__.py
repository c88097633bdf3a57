from .model import CsvMap, partition_hemisphere, plan_hemisphere, partition_units
from .seeds import distribute_counts, fps_seeds, near_equal_quotas, refine_seeds, medoids
from .grow import GrowResult, grow
from .balance import SvAdjacency, BalanceResult, sv_adjacency, balance, bound_violation
from .faces import face_adjacency, face_regions, face_members
