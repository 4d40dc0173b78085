from suft.harness.run_config import RunConfig
from suft.harness.training import RunRecord, train_run, train_seeds, random_policy_reward
from suft.harness.metrics import (smooth, upper_median, improvement_pct, signed_improvement_pct, log_improvement,
                                  mean_reward_ratio_pct, welch_t_test, human_normalized_score, improvement_summary)
from suft.harness.comparison import ComparisonReport, check_protocol, compare, lambda_sweep
from suft.harness.report import build_report
