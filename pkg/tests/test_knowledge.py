from hypothesis import given, settings
from hypothesis import strategies as st

from ktforge.frontend import model_from_texts
from ktforge.knowledge import build_index, dumps_index, loads_index, lookup_simple_class, update_index

ACCOUNT = """package bank;

public class Account {
    private double balance;
    private boolean frozen;

    private void validateAccount() {
        if (frozen) throw new IllegalStateException("frozen");
    }

    public void updateBalance(double delta) {
        validateAccount();
        this.balance += delta;
    }

    public void touch() {
    }
}
"""

FLAT = "package util.maps;\n\npublic class Flat3Map {\n    public int size() { return 0; }\n}\n"


def _index(texts):
    return build_index(model_from_texts(texts))


def test_update_balance_dependencies():
    unit = _index({"bank/Account.java": ACCOUNT}).units["bank.Account#updateBalance(double)"]
    assert unit.invoked_methods == ("bank.Account#validateAccount()",)
    assert unit.accessed_fields == (("bank.Account", "balance"),)


def test_empty_body_has_no_dependencies():
    unit = _index({"bank/Account.java": ACCOUNT}).units["bank.Account#touch()"]
    assert unit.invoked_methods == () and unit.accessed_fields == () and unit.unresolved_calls == ()


def test_external_calls_kept_raw():
    src = "package a;\nclass C {\n  java.util.List<String> xs;\n  void f() { xs.add(\"v\"); System.out.println(1); }\n}\n"
    unit = _index({"a/C.java": src}).units["a.C#f()"]
    assert unit.invoked_methods == ()
    assert "xs.add" in unit.unresolved_calls
    assert ("a.C", "xs") in unit.accessed_fields


def test_simple_class_lookup(toy_index):
    assert lookup_simple_class(toy_index, "Parser") == {"toy.config.Parser", "toy.text.Parser"}
    assert lookup_simple_class(toy_index, "NoSuchThing") == frozenset()
    flat = _index({"util/maps/Flat3Map.java": FLAT})
    assert lookup_simple_class(flat, "Flat3Map") == {"util.maps.Flat3Map"}


def test_simple_name_index_projects_classes(toy_index):
    projected = {}
    for qn, rec in toy_index.classes.items():
        projected.setdefault(rec.simple_name, set()).add(qn)
    assert {k: set(v) for k, v in toy_index.simple_name_index.items()} == projected
    for unit in toy_index.units.values():
        assert unit.containing_class in toy_index.classes


def test_accessed_fields_are_declared(toy_index):
    for unit in toy_index.units.values():
        for cls, name in unit.accessed_fields:
            rec = toy_index.classes[cls]
            enum_constant = rec.kind == "enum" and name.isupper()
            assert rec.field(name) is not None or enum_constant, (unit.callable_id, cls, name)


def test_no_duplicate_dependencies(toy_index):
    for unit in toy_index.units.values():
        assert len(set(unit.invoked_methods)) == len(unit.invoked_methods)
        assert len(set(unit.accessed_fields)) == len(unit.accessed_fields)


def test_no_change_update_is_identity(toy_index, toy_model):
    again = update_index(toy_index, set(), toy_model)
    assert again == toy_index
    assert dumps_index(again) == dumps_index(toy_index)


def test_deleting_a_file_removes_its_units():
    texts = {"bank/Account.java": ACCOUNT, "util/maps/Flat3Map.java": FLAT}
    index = _index(texts)
    del texts["util/maps/Flat3Map.java"]
    smaller = update_index(index, {"util/maps/Flat3Map.java"}, model_from_texts(texts))
    assert not [c for c in smaller.units if c.startswith("util.")]
    assert smaller.lookup_simple_class("Flat3Map") == frozenset()
    assert "util/maps/Flat3Map.java" not in smaller.file_digests


def test_edit_to_one_file_reuses_other_units():
    texts = {"bank/Account.java": ACCOUNT, "util/maps/Flat3Map.java": FLAT}
    index = _index(texts)
    texts["util/maps/Flat3Map.java"] = FLAT.replace("return 0;", "return 3;")
    model = model_from_texts(texts)
    updated = update_index(index, {"util/maps/Flat3Map.java"}, model)
    assert updated == build_index(model)
    assert updated.units["bank.Account#touch()"] is index.units["bank.Account#touch()"]


def test_unknown_changed_path_is_harmless(toy_index, toy_model):
    assert update_index(toy_index, {"not/a/File.java"}, toy_model) == toy_index


def test_content_digest_tracks_fields():
    before = _index({"bank/Account.java": ACCOUNT}).units
    after = _index({"bank/Account.java": ACCOUNT.replace("this.balance += delta;", "this.frozen = true;")}).units
    same = "bank.Account#touch()"
    changed = "bank.Account#updateBalance(double)"
    assert before[same].content_digest == after[same].content_digest
    assert before[changed].content_digest != after[changed].content_digest


def test_round_trip(toy_index):
    text = dumps_index(toy_index)
    loaded = loads_index(text)
    assert loaded == toy_index
    assert dumps_index(loaded) == text


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_order_independent(toy_model, rnd):
    paths = list(toy_model.units)
    rnd.shuffle(paths)
    texts = {p: toy_model.units[p].text for p in paths}
    assert dumps_index(build_index(model_from_texts(texts))) == dumps_index(build_index(toy_model))
