"""The tiny language and what its interpreter records.

Every executed statement appends an (id, post-state) step to the trace, so a
run is a complete movie of the program's variables; branch outcomes are noted
on the side for coverage bookkeeping.
"""
from blendtrace.minilang import execute, observable_state, parse_program

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
    print(SOURCE)
    print("statement table (the ids traces refer to):")
    for sid, stmt in enumerate(program.statements):
        print(f"  {sid}: {' '.join(stmt.tokens)}")

    trace = execute(program, {"a": [3, -1, 2]})
    names = list(program.variables)
    print(f"\nexecuting on a = [3, -1, 2]; variables are {names}:")
    for sid, state in trace.steps:
        rendered = ", ".join(f"{n}={v}" for n, v in zip(names, state))
        print(f"  stmt {sid}: {rendered}")

    print(f"\nreturn value: {trace.return_value}")
    print(f"branch arms covered (site, taken): {sorted(trace.covered)}")
    print(f"observable state (return + final arrays): {observable_state(program, trace)}")


if __name__ == "__main__":
    main()
