"""Acceptance suite: one test per criterion, each checked against its runtime budget.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
from __future__ import annotations

import json
import random
from fractions import Fraction

from conftest import DATA, GOLDEN, TOY
from oracles import bfs_distance_from_accessible, metrics_reference, similarity_oracle, slice_oracle

from ktforge.cli import main as cli_main
from ktforge.evaluation import TaskResult, compute_metrics, fmt2, parse_coverage_report
from ktforge.frontend.model import model_from_texts, parse_project
from ktforge.integrator import integrate, integrate_text, merge_lifecycle, parse_test_class
from ktforge.knowledge import build_index, dumps_index, update_index
from ktforge.pipeline import KNOWLEDGE_MARKERS
from ktforge.refiner import parse_diagnostics
from ktforge.retrieval import UsageProfile, similarity
from ktforge.usage.callgraph import CallGraph, discover_callers
from ktforge.usage.cfg import ControlFlowGraph, CfgEdge, CfgNode
from ktforge.usage.slicing import UnreachableCallsite, extract_usage_trace


# ---------------------------------------------------------------------------
# 1. knowledge base golden and incremental update


_EXTRA_FILE = """package toy.extra;

import toy.bank.Account;

/** Probe class {n}. */
public class Extra{n} {{
    private Account target;
    private int hits;

    public boolean probe(double amount) {{
        hits = hits + 1;
        return target.withdraw(amount);
    }}
}}
"""


def _edit(rng: random.Random, texts: dict[str, str], model, serial: int) -> tuple[dict[str, str], set[str]]:
    """One random source edit of ``texts`` (whose parse is ``model``)."""
    texts = dict(texts)
    op = rng.choice(["body", "body", "method", "delete", "doc", "add_file", "drop_file", "noop"])
    paths = sorted(texts)
    if op == "add_file":
        path = f"src/main/java/toy/extra/Extra{serial}.java"
        texts[path] = _EXTRA_FILE.format(n=serial)
        return texts, {path}
    if op == "drop_file" and len(paths) > 2:
        path = rng.choice(paths)
        del texts[path]
        return texts, {path}
    if op == "noop":
        return texts, set()
    path = rng.choice(paths)
    text = texts[path]
    decls = sorted((d for d in model.callables.values() if d.source_unit == path and d.body_span), key=lambda d: d.id)
    classes = sorted((c for c in model.classes.values() if c.source_unit == path and c.kind == "class"),
                     key=lambda c: c.qualified_name)
    if op == "body" and decls:
        decl = rng.choice(decls)
        rec = model.classes[decl.declaring_class]
        simple = [model.callables[m] for m in rec.methods if not model.callables[m].parameters]
        choices = [f"int probe{serial} = {serial};"]
        choices += [f"Object probe{serial} = {f.name};" for f in rec.fields]
        choices += [f"{m.name}();" for m in simple if m.id != decl.id]
        stmt = rng.choice(choices)
        at = decl.body_span[0] + 1
        texts[path] = text[:at] + "\n        " + stmt + text[at:]
        return texts, {path}
    if op == "method" and classes:
        rec = rng.choice(classes)
        fields = [f.name for f in rec.fields if not f.is_static] or ["0"]
        body = f"return {rng.choice(fields)};" if rng.random() < 0.5 else "return null;"
        member = f"\n    /** Extra accessor {serial}. */\n    public Object extra{serial}() {{\n        {body}\n    }}\n"
        # insert before the closing brace of the last top-level class
        close = text.rstrip().rfind("}")
        texts[path] = text[:close] + member + text[close:]
        return texts, {path}
    if op == "delete" and decls:
        decl = rng.choice(decls)
        start, end = decl.decl_span
        texts[path] = text[:start] + text[end:]
        return texts, {path}
    if op == "doc" and "/** " in text:
        texts[path] = text.replace("/** ", f"/** Revision {serial}. ", 1)
        return texts, {path}
    return texts, set()


def test_criterion_1_index_golden_and_incremental_update(criterion, tmp_path):
    with criterion(1, "index golden byte-identity; update == fresh build on 50 edit sequences", 5.0):
        out = tmp_path / "kb.jsonl"
        assert cli_main(["index", str(TOY), "-o", str(out)]) == 0
        assert out.read_bytes() == (GOLDEN / "toy_index.jsonl").read_bytes()

        base = {p: u.text for p, u in parse_project(TOY).units.items()}
        rng = random.Random(1)
        recomputed_somewhere = 0
        for _ in range(50):
            texts = dict(base)
            current = model_from_texts(texts)
            index = build_index(current)
            for step in range(rng.randint(2, 5)):
                new_texts, changed = _edit(rng, texts, current, step)
                model = model_from_texts(new_texts)
                if model.diagnostics or not model.callables:
                    continue  # an edit that broke a file is not a valid project version
                if rng.random() < 0.2:
                    changed = changed | {"src/main/java/toy/never/Seen.java"}  # unknown path: treated as addition
                updated = update_index(index, changed, model)
                fresh = build_index(model)
                assert dumps_index(updated) == dumps_index(fresh)
                assert updated.units == fresh.units
                recomputed_somewhere += sum(1 for c in updated.units if updated.units[c] is not index.units.get(c))
                texts, current, index = new_texts, model, updated
        assert recomputed_somewhere > 0


# ---------------------------------------------------------------------------
# 2. similarity


def test_criterion_2_similarity_oracle(criterion):
    with criterion(2, "similarity == set-arithmetic oracle on 1000 profiles; symmetry; self-similarity", 5.0):
        rng = random.Random(2)
        methods = [f"p.C#m{i}()" for i in range(8)]
        fields = [(f"p.C{i % 3}", f"f{i}") for i in range(8)]

        def profile(i: int) -> UsageProfile:
            m = rng.sample(methods, rng.randint(0, 5))
            f = rng.sample(fields, rng.randint(0, 5))
            return UsageProfile(f"p.X#a{i}()", frozenset(m), frozenset(f))

        profiles = [profile(i) for i in range(1000)]
        for i, a in enumerate(profiles):
            b = profiles[rng.randrange(len(profiles))] if rng.random() < 0.8 else a
            got = similarity(a, b)
            want = similarity_oracle(sorted(a.M), sorted(a.F), sorted(b.M), sorted(b.F))
            assert isinstance(got, Fraction)
            assert got == want
            assert f"{float(got):.4f}" == f"{float(want):.4f}"
            assert 0 <= got <= 2
            assert similarity(b, a) == got
            own = similarity(a, a)
            if a.M and a.F:
                assert own == 2
            else:
                assert own == (1 if a.M else 0) + (1 if a.F else 0)


# ---------------------------------------------------------------------------
# 3. call chains and slicing


def _random_call_graph(rng: random.Random):
    n = rng.randint(2, 30)
    nodes = [f"p.C{rng.randint(0, 3)}#n{i:02d}()" for i in range(n)]
    edges = set()
    for _ in range(rng.randint(n // 2, 2 * n)):
        a, b = rng.choice(nodes), rng.choice(nodes)
        edges.add((a, b))
    accessible = {x for x in nodes if rng.random() < 0.3}
    graph = CallGraph(frozenset(nodes), {e: ((0, 0),) for e in sorted(edges)}, frozenset(accessible))
    return graph, nodes, edges, accessible


def _check_chains(graph, nodes, edges, accessible, focal):
    found = discover_callers(focal, graph)
    assert [c for c, _ in found] == sorted({a for a, b in edges if b == focal and a != focal})
    for caller, chain in found:
        assert chain[-2:] == [caller, focal]
        for a, b in zip(chain, chain[1:]):
            assert (a, b) in edges
        dist = bfs_distance_from_accessible(caller, edges, accessible)
        if dist is None:
            assert chain == [caller, focal]
            continue
        assert len(chain) - 2 == dist
        # among the entries at minimal distance the lexicographically first one starts the chain
        starts = [a for a in sorted(accessible) if bfs_distance_from_accessible(caller, edges, {a}) == dist]
        assert chain[0] == starts[0]


def _random_cfg(rng: random.Random):
    size = rng.randint(4, 12)
    variables = "abcde"
    starts = rng.sample(range(10, 400), size)
    kinds = {0: "entry", 1: "exit"}
    for i in range(2, size):
        kinds[i] = rng.choice(["statement", "statement", "branch", "call"])
    kinds[rng.randrange(2, size)] = "call"
    edges: list[tuple[int, int, str | None]] = [(0, 2, None)]
    for i in range(2, size):
        nxt = i + 1 if i + 1 < size else 1
        if kinds[i] == "branch":
            other = rng.randrange(1, size)
            pair = [nxt, other]
            rng.shuffle(pair)
            edges += [(i, pair[0], "true"), (i, pair[1], "false")]
        else:
            if rng.random() < 0.2:
                nxt = rng.randrange(1, size)  # a jump: may leave later nodes dead
            edges.append((i, nxt, None))
            if rng.random() < 0.15:
                edges.append((i, rng.randrange(2, size), "exception"))
    # keep what is reachable over every edge kind, as CFG construction does
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for a, b, _ in edges:
            if a == u and b not in seen:
                seen.add(b)
                stack.append(b)
    seen.add(1)
    edges = list(dict.fromkeys(e for e in edges if e[0] in seen and e[1] in seen))
    spec = {}
    for i in sorted(seen):
        kind = kinds[i]
        defs, uses = set(), set()
        if kind in ("statement", "call"):
            if rng.random() < 0.6:
                defs.add(rng.choice(variables))
            uses = set(rng.sample(variables, rng.randint(0, 2)))
        elif kind == "branch":
            uses = set(rng.sample(variables, rng.randint(1, 2)))
            if rng.random() < 0.1:
                defs.add(rng.choice(variables))
        in_catch = kind == "call" and rng.random() < 0.25
        spec[i] = {"kind": kind, "defs": defs, "uses": uses, "start": 0 if i == 0 else 999 if i == 1 else starts[i],
                   "in_catch": in_catch}
    nodes = {i: CfgNode(i, s["kind"], f"s{i}", (s["start"], s["start"] + 3), frozenset(s["defs"]), frozenset(s["uses"]),
                        ("p.F#focal()",) if s["kind"] == "call" else (), 0, s["in_catch"])
             for i, s in spec.items()}
    cfg = ControlFlowGraph("p.C#caller()", nodes, tuple(CfgEdge(a, b, l) for a, b, l in edges))
    return cfg, spec, edges


def test_criterion_3_call_chains_and_slicing(criterion):
    with criterion(3, "chains == BFS distances on 100 graphs; slices == path-enumeration oracle on 100 CFGs", 30.0):
        rng = random.Random(3)
        with_callers = 0
        for _ in range(100):
            graph, nodes, edges, accessible = _random_call_graph(rng)
            focal = rng.choice(nodes)
            with_callers += bool(graph.callers_of(focal))
            _check_chains(graph, nodes, edges, accessible, focal)
        assert with_callers > 50

        checked = pruned = 0
        while checked < 100:
            cfg, spec, edges = _random_cfg(rng)
            calls = [i for i, s in spec.items() if s["kind"] == "call"]
            if not calls:
                continue
            callsite = rng.choice(calls)
            want = slice_oracle(spec, edges, callsite)
            if want is None:
                try:
                    extract_usage_trace(cfg, callsite, "p.F#focal()")
                except UnreachableCallsite:
                    checked += 1
                    continue
                raise AssertionError("expected UnreachableCallsite")
            trace = extract_usage_trace(cfg, callsite, "p.F#focal()")
            ordered, false_side = want
            assert list(trace.retained_nodes) == ordered
            assert list(trace.false_branches) == false_side
            assert list(trace.retained) == [f"s{i}" for i in ordered]
            pruned += len(spec) - 2 > len(ordered)
            checked += 1
        assert pruned > 30  # the oracle comparison exercised real pruning


# ---------------------------------------------------------------------------
# 4. integration algebra


_LIFECYCLE = {"BeforeEach": "before-each", "AfterEach": "after-each", "BeforeAll": "before-all", "AfterAll": "after-all"}
_SETUP_STMTS = ["calc = new Calc();", "seed = 1;", "calc.reset();", "items.clear();", "count++;",
                "calc.init(seed);", 'items.add("x");']
_TEST_STMTS = ["assertEquals(1, calc.add(0, 1));", "assertTrue(calc.isEmpty());", "int r = calc.add(seed, 2);",
               "assertNotNull(calc);", "calc.reset();", 'assertThrows(IllegalArgumentException.class, () -> calc.div(1, 0));']
_FIELDS = {"calc": "private Calc calc;", "seed": "private int seed = 3;",
           "items": "private List<String> items = new ArrayList<>();", "EPS": "private static final double EPS = 1e-9;"}
_IMPORTS = ["org.junit.jupiter.api.Test", "org.junit.jupiter.api.BeforeEach", "java.util.List", "java.util.ArrayList",
            "static org.junit.jupiter.api.Assertions.assertEquals", "static org.junit.jupiter.api.Assertions.assertTrue"]
_BROKEN = "@Test\nvoid broken() {\n    assertEquals(1, 1);\n"


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _method(rng, kind: str, name: str, stmts: list[str]) -> tuple[str, dict]:
    if kind in _LIFECYCLE:
        static = "static " if kind.endswith("All") else ""
        text = f"@{kind}\n{static}void {name}() {{\n" + "".join(f"    {s}\n" for s in stmts) + "}\n"
        return text, {"category": "lifecycle", "key": _LIFECYCLE[kind], "stmts": stmts}
    if kind == "test":
        text = f"@Test\nvoid {name}() {{\n" + "".join(f"    {s}\n" for s in stmts) + "}\n"
        return text, {"category": "test", "key": name, "body": _collapse(" ".join(stmts))}
    text = f"private int {name}(int x) {{\n" + "".join(f"    {s}\n" for s in stmts) + "    return x;\n}\n"
    return text, {"category": "helper", "key": name, "body": _collapse(" ".join(stmts + ["return x;"]))}


def _member(rng) -> tuple[str, dict]:
    roll = rng.random()
    if roll < 0.3:
        kind = rng.choice(list(_LIFECYCLE))
        return _method(rng, kind, rng.choice(["setUp", "init", "tearDown"]), rng.sample(_SETUP_STMTS, rng.randint(0, 3)))
    if roll < 0.75:
        return _method(rng, "test", rng.choice(["testA", "testB", "testC", "testD"]),
                       rng.sample(_TEST_STMTS, rng.randint(0, 4)))
    if roll < 0.9:
        return _method(rng, "helper", rng.choice(["helperA", "helperB"]), rng.sample(_TEST_STMTS[2:5], rng.randint(0, 2)))
    name = rng.choice(sorted(_FIELDS))
    return _FIELDS[name] + "\n", {"category": "field", "key": name}


def _random_combination(rng):
    members, seen = [], set()
    for _ in range(rng.randint(0, 5)):
        text, info = _member(rng)
        if (info["category"], info["key"]) not in seen:  # a framework has no duplicate members
            seen.add((info["category"], info["key"]))
            members.append((text, info))
    imports = rng.sample(_IMPORTS, rng.randint(0, 3))
    framework = "package toy.gen;\n\n" + "".join(f"import {i};\n" for i in imports) + "\nclass CalcTest {\n"
    framework += "\n".join("\n".join("    " + line for line in t.splitlines()) for t, _ in members) + "\n}\n"
    snippets, infos, snippet_imports = [], [], list(imports)
    for _ in range(rng.randint(0, 5)):
        if rng.random() < 0.1:
            snippets.append(_BROKEN)
            infos.append(None)
            continue
        parts = [_member(rng) for _ in range(rng.randint(1, 3))]
        imps = rng.sample(_IMPORTS, rng.randint(0, 2))
        snippet_imports += imps
        snippets.append("".join(f"import {i};\n" for i in imps) + "\n".join(t for t, _ in parts))
        infos.append([info for _, info in parts])
    return framework, [info for _, info in members], snippets, infos, snippet_imports


def _expected_members(framework_infos, snippet_infos):
    table: dict[tuple[str, str], dict] = {}
    for info in list(framework_infos) + [i for group in snippet_infos if group for i in group]:
        key = (info["category"], info["key"])
        if key not in table:
            table[key] = dict(info, stmts=list(info.get("stmts", [])))
            if info["category"] == "lifecycle":
                table[key]["stmts"] = list(dict.fromkeys(info["stmts"]))
            continue
        have = table[key]
        if info["category"] == "lifecycle":
            have["stmts"] += [s for s in dict.fromkeys(info["stmts"]) if s not in have["stmts"]]
        elif info["category"] in ("test", "helper") and len(info["body"]) > len(have["body"]):
            have["body"] = info["body"]
    return table


def test_criterion_4_integration_algebra(criterion):
    with criterion(4, "merge idempotence, longer-body dedup, run-twice identity, member accounting (500 cases)", 10.0):
        rng = random.Random(4)
        for _ in range(500):
            framework, fw_infos, snippets, infos, all_imports = _random_combination(rng)
            result = integrate(framework, snippets)
            text = result.render()

            # run twice, and re-integrating into the output, change nothing
            assert integrate_text(framework, snippets) == text
            assert integrate(parse_test_class(text), snippets).render() == text

            # member accounting
            expected = _expected_members(fw_infos, infos)
            assert result.stats.skipped == sum(1 for i in infos if i is None)
            assert len(result.members) == result.stats.expected_out == len(expected)
            assert [(m.category, m.key) for m in result.members] == list(expected)
            assert set(result.imports) == set(all_imports)

            for m in result.members:
                want = expected[(m.category, m.key)]
                if m.category == "lifecycle":
                    assert _collapse(m.body) == _collapse(" ".join(want["stmts"]))
                    # the merge is idempotent for every input that went into it
                    for group in [fw_infos] + [g for g in infos if g]:
                        for info in group:
                            if (info["category"], info["key"]) == (m.category, m.key):
                                again = "\n".join(info["stmts"])
                                assert merge_lifecycle(m.body, again) == m.body
                elif m.category in ("test", "helper"):
                    assert _collapse(m.body) == want["body"]


# ---------------------------------------------------------------------------
# 5. end-to-end replay


def test_criterion_5_replay_end_to_end(criterion, tmp_path):
    with criterion(5, "generate --all --backend replay is byte-identical to goldens; repair <= 5; stage separation", 10.0):
        out = tmp_path / "out"
        code = cli_main(["-c", str(TOY / "ktforge.toml"), "generate", "--all", "--backend", "replay", "-o", str(out)])
        assert code == 0
        golden_root = GOLDEN / "e2e"
        slugs = sorted(p.name for p in golden_root.iterdir())
        assert len(slugs) == 3
        assert sorted(p.name for p in out.iterdir()) == slugs
        iterations = {}
        for slug in slugs:
            for golden in sorted((golden_root / slug).iterdir()):
                produced = out / slug / golden.name
                assert produced.read_bytes() == golden.read_bytes(), f"{slug}/{golden.name} differs"
            summary = json.loads((out / slug / "artifact.json").read_text())
            assert summary["status"] == "compiled+passed"
            assert summary["iterations_used"] <= 5
            iterations[slug] = [h["strategies"] for h in summary["repair_history"]]

            transcript = [json.loads(line) for line in (out / slug / "transcript.jsonl").read_text().splitlines()]
            design = [e for e in transcript if e["stage"].startswith("design")]
            framework = [e for e in transcript if e["stage"] == "framework"]
            assert design and framework
            for e in design:
                for msg in e["request"]["messages"]:
                    assert not any(marker in msg["content"] for marker in KNOWLEDGE_MARKERS)
            # the check is not vacuous: framework prompts do carry the knowledge sections
            assert "## Relevant Project Knowledge" in framework[0]["request"]["messages"][0]["content"]
        # one focal needed rule-based import repair followed by two model repairs
        assert sorted(iterations.values()) == [[], [["rule"]], [["rule"], ["llm"], ["llm"]]]


# ---------------------------------------------------------------------------
# 6. metrics


def _random_batch(rng: random.Random, n: int) -> list[dict]:
    rows = []
    for i in range(n):
        compiled = rng.random() < 0.85
        clean = compiled and rng.random() < 0.8
        line = branch = None
        if compiled and rng.random() < 0.95:
            line = (rng.randint(0, 40), rng.randint(0, 40))
            branch = (rng.randint(0, 12), rng.randint(0, 12))
        rows.append({"focal": f"p.C#m{i}()", "compiled": compiled, "clean": clean, "line": line, "branch": branch,
                     "time": round(rng.uniform(5, 400), 3), "cases": rng.randint(0, 15)})
    return rows


def _results(rows: list[dict]) -> list[TaskResult]:
    return [TaskResult(r["focal"], r["compiled"], r["clean"], r["line"], r["branch"], r["time"], r["cases"]) for r in rows]


def test_criterion_6_metrics_regression(criterion):
    with criterion(6, "metrics == reference on a 110-task batch; hand-built batch gives CPR 100.00 / EPR 77.07", 1.0):
        rng = random.Random(6)
        for _ in range(5):
            rows = _random_batch(rng, 110)
            report = compute_metrics(_results(rows))
            ref = metrics_reference(rows)
            for name, value in ref.items():
                assert abs(float(getattr(report, name)) - value) < 1e-9, name
                assert report.rendered()[name] == f"{value:.2f}", name

        # 157 tasks, all compiling, 121 executing cleanly: 121/157 = 77.0700...%
        # Coverage over a denominator of 10000 lines lets each task carry an exact two-decimal percentage.
        clean_line = _spread(6593_29, 121)  # hundredths of a percent; sums to 121 * 54.49
        fail_line = _spread(2999_41, 36)  # 157 * 61.10 - 121 * 54.49
        clean_branch = _spread(5593_83, 121)  # 121 * 46.23
        fail_branch = _spread(2662_80, 36)  # 157 * 52.59 - 121 * 46.23
        times = _spread(23970_76, 157)  # 157 * 152.68 seconds, in hundredths
        cases = _spread(1151, 157)  # 7.331... test cases per class
        results = []
        for i in range(157):
            clean = i < 121
            lc = clean_line[i] if clean else fail_line[i - 121]
            bc = clean_branch[i] if clean else fail_branch[i - 121]
            results.append(TaskResult(f"p.C#m{i}()", True, clean, (lc, 10000 - lc), (bc, 10000 - bc),
                                      times[i] / 100, cases[i]))
        rendered = compute_metrics(results).rendered()
        assert rendered["CPR"] == "100.00"
        assert rendered["EPR"] == "77.07"
        assert rendered == {"CPR": "100.00", "EPR": "77.07", "LC": "61.10", "BC": "52.59", "LCP": "54.49",
                            "BCP": "46.23", "AvT": "152.68", "AvTC": "7.33"}
        assert fmt2(Fraction(100 * 121, 157)) == "77.07"


def _spread(total: int, n: int) -> list[int]:
    """n nonnegative integers summing to total, as even as possible."""
    base, extra = divmod(total, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


# ---------------------------------------------------------------------------
# 7. diagnostics and coverage parsers


COVERAGE_GOLDEN = {
    "toy.bank.Account#withdraw(double)": ((9, 3), (3, 1)),
    "toy.bank.Account#<init>(String)": ((2, 0), (0, 0)),
    "toy.bank.Account#<init>(String,double)": ((5, 0), (0, 0)),
    "toy.bank.Account#deposit(double)": ((0, 4), (0, 2)),
    "toy.bank.Bank#transfer(String,String,double)": ((9, 1), (4, 2)),
    "toy.bank.Bank#openAccount(String,double)": ((3, 0), (0, 0)),
    "toy.match.PatternMatcher#findMatchPattern(Patterns)": ((7, 2), (3, 1)),
    "toy.match.PatternMatcher#findMatchPattern(InputCharactor[],ValuePatterns)": ((8, 2), (5, 3)),
    "toy.match.PatternMatcher.ValuePatterns#<init>(String)": ((3, 0), (0, 0)),
    "toy.match.PatternMatcher.ValuePatterns#text()": ((1, 0), (0, 0)),
}


def test_criterion_7_diagnostics_and_coverage_parsers(criterion):
    with criterion(7, "committed transcripts parse to golden diagnostics and coverage counters", 1.0):
        transcripts = DATA / "transcripts"
        golden = json.loads((transcripts / "diagnostics.golden.json").read_text())
        files = sorted(p.name for p in transcripts.glob("*.txt"))
        assert files == sorted(golden)
        for name in files:
            got = [
                {"kind": d.kind, "file": d.file, "line": d.line, "symbol": d.symbol, "message": d.message,
                 "test": d.test, "stack": list(d.stack)}
                for d in parse_diagnostics((transcripts / name).read_text())
            ]
            assert got == golden[name], name
        report = (transcripts / "jacoco_toy.xml").read_text()
        for focal, counters in COVERAGE_GOLDEN.items():
            assert parse_coverage_report(report, focal) == counters, focal
