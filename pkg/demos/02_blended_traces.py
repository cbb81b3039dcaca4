"""From many single runs to a few blended traces.

Runs sharing a statement path carry redundant structure, so we group
executions by path, then zip each group's states together: one blended trace
per path, each statement paired with the value sets seen across runs.  A
greedy pass over branch coverage picks the smallest path set worth keeping.
"""
from blendtrace.minilang import InputConfig, execute, parse_program, random_inputs
from blendtrace.traces import build_blended, group_by_path, select_min_coverage_set

SOURCE = """\
fn sum_positive(a: int[]) {
  s: int = 0;
  i: int = 0;
  while (i < len(a)) {
    if (a[i] > 0) {
      s = s + a[i];
    }
    i = i + 1;
  }
  return s;
}
"""


def main() -> None:
    program = parse_program(SOURCE)
    config = InputConfig(int_low=-4, int_high=4, array_min_len=2, array_max_len=3)
    traces = [
        execute(program, bindings)
        for bindings in random_inputs(program, 60, seed=42, config=config)
    ]
    groups = group_by_path(traces)
    print(f"{len(traces)} runs fell on {len(groups)} distinct paths\n")

    branches = {}
    blended = []
    for key, group in sorted(groups.items(), key=lambda kv: -len(kv[1])):
        if len(group) < 3:
            continue  # too few concretes on this path to blend
        bt = build_blended(group, n_eps=3)  # blend the first three concretes
        blended.append(bt)
        branches[bt.key] = group[0].covered
        print(f"path {key[:12]}…: {len(group)} runs, {len(bt.pairs)} statements, "
              f"{bt.concrete_count} concretes blended")

    bt = blended[0]
    print("\nfirst blended trace, step by step (statement id: states across runs):")
    for pair in bt.pairs[:6]:
        print(f"  stmt {pair.statement_id}: {pair.states}")
    print(f"  ... {len(bt.pairs) - 6} more steps")

    keep = select_min_coverage_set(branches)
    full = frozenset().union(*branches.values())
    kept_cov = frozenset().union(*(branches[k] for k in keep))
    print(f"\ncoverage-minimal selection keeps {len(keep)} of {len(branches)} paths")
    print(f"branch arms covered by the selection: {len(kept_cov)} of {len(full)} (all preserved)")


if __name__ == "__main__":
    main()
