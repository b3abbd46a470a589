"""Random model documents for property tests."""
import random

from reorg import load_model


def random_document(rng: random.Random, n_resources=5, n_functionalities=4, n_types=4):
    concepts = {"Iface": {"kind": "interface"}}
    resources = []
    for i in range(n_resources):
        name = f"R{i}"
        spec = {"p_survival": round(rng.uniform(0.5, 1.0), 3)}
        if resources and rng.random() < 0.3:
            spec["parent"] = rng.choice(resources)
        concepts[name] = spec
        resources.append(name)
    functionalities = {}
    for j in range(n_functionalities):
        reqs = {r: rng.randint(1, 2) for r in rng.sample(resources, rng.randint(0, 3))}
        if j and rng.random() < 0.5:
            reqs[f"F{rng.randrange(j)}"] = 1
        functionalities[f"F{j}"] = {"requires": reqs}
    agent_types = {}
    for k in range(n_types):
        agent_types[f"T{k}"] = {
            "resources": {r: rng.randint(1, 2) for r in rng.sample(resources, rng.randint(0, 3))},
            "interfaces": [
                {"type": "Iface", "gender": "male", "count": rng.randint(0, 2)},
                {"type": "Iface", "gender": "female", "count": rng.randint(0, 2)},
            ],
            "properties": {"pw": rng.randint(0, 100), "v_nom": 0, "tcap": 0, "tcon": 1},
        }
    return {"concepts": concepts, "functionalities": functionalities, "agent_types": agent_types}


def random_model(seed: int, **kw):
    return load_model(random_document(random.Random(seed), **kw))
