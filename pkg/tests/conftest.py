from importlib.resources import files

import pytest

from reorg import load_model, load_model_file

SHERPA_DOC = """
concepts:
  Localization: {p_survival: 0.95}
  Locomotion: {p_survival: 0.95}
  Mapping: {p_survival: 0.95}
  PowerSource: {p_survival: 0.95}
  PayloadBattery-PowerSource: {parent: PowerSource}
  Camera: {p_survival: 0.95}
  EmiInterface: {kind: interface}
functionalities:
  MoveTo: {requires: {Localization: 1, Locomotion: 1, Mapping: 1, PowerSource: 1}}
  ImageProvider: {requires: {Camera: 1, PowerSource: 1}}
  LocationImageProvider: {requires: {ImageProvider: 1, MoveTo: 1}}
agent_types:
  SherpaTT:
    resources: {Localization: 1, Locomotion: 1, Mapping: 1, PowerSource: 1, Camera: 2}
    interfaces: [{type: EmiInterface, gender: male, count: 4}, {type: EmiInterface, gender: female, count: 2}]
    properties: {pw: 100, esourcecap: 10, esupply: 24}
  PayloadBattery:
    resources: {PayloadBattery-PowerSource: 1}
    interfaces: [{type: EmiInterface, gender: male, count: 1}, {type: EmiInterface, gender: female, count: 1}]
    properties: {pw: 100}
formulas:
  ecap: esourcecap * esupply
"""


@pytest.fixture(scope="session")
def model():
    return load_model_file(files("reorg") / "data" / "moreorg_model.yaml")


@pytest.fixture(scope="session")
def sherpa_model():
    return load_model(SHERPA_DOC)


@pytest.fixture(scope="session")
def data_dir():
    return files("reorg") / "data"


@pytest.fixture(scope="session")
def lunar_mission(model, data_dir):
    from reorg.mission import load_mission_file

    return load_mission_file(data_dir / "lunar_mission.yaml", model)


@pytest.fixture(scope="session")
def desk_mission(model, data_dir):
    from reorg.mission import load_mission_file

    return load_mission_file(data_dir / "desk_mission.yaml", model)
