"""Shared scenario builders and small generators for the test suite."""

from __future__ import annotations

import random

from satchase.core import Atom, Fd, Instance, Schema, Scenario, StTgd, Var


def V(name: str) -> Var:
    return Var(name)


def researcher_scenario() -> Scenario:
    """Researchers/prizes/collaborations mapping: three tgds feeding two
    keyed target relations."""
    source = Schema()
    source.add("Active_Researcher", ("name", "surname", "age"))
    source.add("Awarded_Researcher", ("name", "surname", "awardName", "year"))
    source.add("Researcher_Collaboration", ("name1", "surname1", "name2", "surname2"))
    target = Schema()
    target.add("Researcher", ("name", "surname", "idRewarding", "idClub"))
    target.add("Research_Prize", ("awardName", "year", "idResearcher"))

    m1 = StTgd(
        id="m1",
        body=[Atom("Active_Researcher", (V("n"), V("s"), V("a")))],
        head=[Atom("Researcher", (V("n"), V("s"), V("Y1"), V("Y2")))],
    )
    m2 = StTgd(
        id="m2",
        body=[Atom("Awarded_Researcher", (V("n"), V("s"), V("p"), V("w")))],
        head=[
            Atom("Researcher", (V("n"), V("s"), V("T"), V("T1"))),
            Atom("Research_Prize", (V("p"), V("w"), V("T"))),
        ],
    )
    m3 = StTgd(
        id="m3",
        body=[Atom("Researcher_Collaboration", (V("n"), V("s"), V("n2"), V("s2")))],
        head=[
            Atom("Researcher", (V("n"), V("s"), V("E1"), V("E2"))),
            Atom("Researcher", (V("n2"), V("s2"), V("E3"), V("E2"))),
        ],
    )
    e1 = Fd(id="e1", relation="Researcher", lhs=(1, 2), rhs=(3, 4))
    e2 = Fd(id="e2", relation="Research_Prize", lhs=(1, 2), rhs=(3,))
    return Scenario(source=source, target=target, tgds=[m1, m2, m3], fds=[e1, e2])


def researcher_source() -> Instance:
    scenario = researcher_scenario()
    instance = Instance(scenario.source)
    instance.extend(
        "Active_Researcher",
        [("Ronald", "Red", 60), ("John", "Gray", 33)],
    )
    instance.extend(
        "Awarded_Researcher",
        [
            ("John", "Gray", "Nobel", 2014),
            ("Wallace", "Blue", "Nobel", 1932),
            ("Fredric", "Brown", "Nobel", 1932),
            ("Marlon", "Bold", "Nobel", 1954),
            ("Marlon", "Bold", "Nobel", 1972),
        ],
    )
    instance.extend(
        "Researcher_Collaboration",
        [
            ("Ronald", "Red", "Matthew", "Orange"),
            ("Fredric", "Brown", "Miriam", "White"),
        ],
    )
    return instance


def early_egd_scenario() -> tuple[Scenario, Instance]:
    """Three tgds where eager fd application shrinks the second overlap
    away: the set stays at two members instead of three."""
    source = Schema()
    source.add("A", ("a",))
    source.add("B", ("b",))
    target = Schema()
    target.add("R", ("k", "v"))
    target.add("S", ("k", "v"))
    m1 = StTgd(
        id="m1",
        body=[Atom("A", (V("x"),))],
        head=[Atom("R", (V("x"), V("Y"))), Atom("S", (V("Y"), V("Z")))],
    )
    m2 = StTgd(id="m2", body=[Atom("A", (V("x"),))], head=[Atom("R", (V("x"), V("x")))])
    m3 = StTgd(id="m3", body=[Atom("B", (V("x"),))], head=[Atom("S", (V("x"), V("Z")))])
    f1 = Fd(id="f1", relation="R", lhs=(1,), rhs=(2,))
    f2 = Fd(id="f2", relation="S", lhs=(1,), rhs=(2,))
    scenario = Scenario(source=source, target=target, tgds=[m1, m2, m3], fds=[f1, f2])
    instance = Instance(source)
    instance.add("A", (1,))
    instance.add("B", (2,))
    return scenario, instance


def mutables_tgd() -> tuple[StTgd, list[Fd]]:
    """One tgd with a mix of mutable and non-mutable existentials under
    first-attribute keys on every target relation."""
    tgd = StTgd(
        id="m",
        body=[Atom("A", (V("x"), V("y")))],
        head=[
            Atom("R", (V("x"), V("C"))),
            Atom("S", (V("C"), V("G"))),
            Atom("T", (V("y"), V("D"))),
            Atom("U", (V("L"), V("D"))),
            Atom("W", (V("V"), V("M"))),
            Atom("W", (V("V"), V("N"))),
        ],
    )
    fds = [
        Fd(id=f"k{r}", relation=r, lhs=(1,), rhs=(2,)) for r in ("R", "S", "T", "U", "W")
    ]
    return tgd, fds


def random_scenario(rng: random.Random) -> tuple[Scenario, Instance]:
    """A small random scenario plus source instance.  Constants may land in
    fd right-hand sides, so some scenarios genuinely fail the chase."""
    n_src = rng.randint(1, 3)
    n_tgt = rng.randint(1, 3)
    source, target = Schema(), Schema()
    src_arities = []
    for i in range(n_src):
        arity = rng.randint(1, 3)
        source.add(f"A{i}", tuple(f"c{j}" for j in range(arity)))
        src_arities.append(arity)
    tgt_arities = []
    for i in range(n_tgt):
        arity = rng.randint(2, 3)
        target.add(f"R{i}", tuple(f"c{j}" for j in range(arity)))
        tgt_arities.append(arity)

    tgds = []
    for t in range(rng.randint(1, 4)):
        body = []
        body_vars = []
        for _ in range(rng.randint(1, 2)):
            rel = rng.randrange(n_src)
            args = []
            for _ in range(src_arities[rel]):
                name = f"x{rng.randint(0, 3)}"
                args.append(V(name))
                body_vars.append(name)
            body.append(Atom(f"A{rel}", tuple(args)))
        head = []
        for _ in range(rng.randint(1, 2)):
            rel = rng.randrange(n_tgt)
            args = []
            for _ in range(tgt_arities[rel]):
                kind = rng.random()
                if kind < 0.45:
                    args.append(V(rng.choice(body_vars)))
                elif kind < 0.8:
                    args.append(V(f"Z{rng.randint(0, 2)}"))
                else:
                    args.append(rng.randint(0, 2))
            head.append(Atom(f"R{rel}", tuple(args)))
        tgds.append(StTgd(id=f"m{t}", body=body, head=head))

    fds = []
    for i in range(n_tgt):
        if rng.random() < 0.7:
            arity = tgt_arities[i]
            lhs = (1,)
            rhs = tuple(p for p in range(2, arity + 1))
            if rhs:
                fds.append(Fd(id=f"f{i}", relation=f"R{i}", lhs=lhs, rhs=rhs))

    scenario = Scenario(source=source, target=target, tgds=tgds, fds=fds)
    instance = Instance(source)
    for i in range(n_src):
        for _ in range(rng.randint(0, 6)):
            instance.add(f"A{i}", tuple(rng.randint(0, 3) for _ in range(src_arities[i])))
    return scenario, instance
