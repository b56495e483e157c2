#include "seatwin/env.hpp"

#include <algorithm>

namespace seatwin {

Observation build_observation(double q_meas_now, double q_meas_prev,
                              double q_dot_prev, double f_meas, double f_des,
                              double dt) {
  Observation obs;
  obs.q_dot = (q_meas_now - q_meas_prev) / dt;
  obs.q_ddot = (obs.q_dot - q_dot_prev) / dt;
  obs.q = std::clamp(q_meas_now, -kObsAngleClampRad, kObsAngleClampRad);
  obs.f = f_meas;
  obs.f_des = f_des;
  return obs;
}

template EpisodeLog run_episode<SimStack>(ActionSource&, const TrajectorySpec&,
                                          SimStack&, const EpisodeConfig&);

}  // namespace seatwin
