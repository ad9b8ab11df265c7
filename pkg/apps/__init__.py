"""
Desk-scale applications: matrix completion benchmark and component demixing.
"""
from .matcomp import (BenchRow, MatCompInstance, estimate_rank_90, gen_matcomp_instance,
                      run_matcomp_benchmark)
from .demix import DemixInstance, DemixResult, gen_demix_instance, run_mca_demix

__all__ = [
    'BenchRow', 'MatCompInstance', 'estimate_rank_90', 'gen_matcomp_instance', 'run_matcomp_benchmark',
    'DemixInstance', 'DemixResult', 'gen_demix_instance', 'run_mca_demix',
]
