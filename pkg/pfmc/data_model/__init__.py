# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""A module for the custom data models of pfmc."""

from pfmc.data_model.exceptions import *
from pfmc.data_model.records import *
from pfmc.data_model.sim_state import *
