"""
From a demonstration to manipulation waypoints
==============================================

Estimates a dishwasher's chain from one synthetic demonstration, then plans
end-effector waypoints for each joint in the demonstrated order: arcs in
1-degree increments for the revolute door, a straight line in 1 cm steps
for the sliding rack.
"""

import numpy as np

from oksm import estimate_oksm
from oksm.core import JointType
from oksm.planner import plan_sequence
from oksm.synthgen import make_template, random_script, render_sequence

template = make_template("dishwasher", rng_seed=5)
script = random_script(template, total_frames=12, rng_seed=9)
seq = render_sequence(template, script, camera_seed=4, noise_sigma=0.0,
                      rng_seed=8)
chain = estimate_oksm(seq)
print("estimated chain:")
for i, node in enumerate(chain.nodes):
    print(f"  joint {i}: {node.joint_type.value:9s} "
          f"direction {node.direction.round(3)} final state {node.final_state:.3f}")

# Grasp a point on each link's observed surface and undo the demonstrated
# motion (close everything back up).
grasps = []
deltas = []
for i, node in enumerate(chain.nodes):
    grasps.append(seq.frames[-1][np.argmax(seq.labels == i + 1)])
    deltas.append(-node.final_state)

plans = plan_sequence(chain, grasps, deltas)
for plan in plans:
    kind = "arc" if plan.joint_type is JointType.REVOLUTE else "line"
    step = (f"{np.rad2deg(plan.step):.0f} deg" if plan.joint_type is JointType.REVOLUTE
            else f"{plan.step * 100:.0f} cm")
    print(f"joint {plan.joint_index}: {len(plan.waypoints):3d} waypoints "
          f"({kind}, {step} steps, {plan.direction_label})")
