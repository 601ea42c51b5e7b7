/* Runs a bundled scenario through the C ABI and prints a one-line summary. */
#include <stdio.h>

#include "hri.h"

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke SCENARIO\n");
        return 2;
    }
    HriScenario *sc = NULL;
    if (hri_scenario_load(argv[1], &sc) != HRI_STATUS_OK) {
        fprintf(stderr, "load: %s\n", hri_last_error_message());
        return 1;
    }
    if (hri_scenario_set_param(sc, "nonsense", 1.0) != HRI_STATUS_UNKNOWN_PARAMETER) {
        return 1;
    }
    HriEpisode *ep = NULL;
    if (hri_episode_run(sc, &ep) != HRI_STATUS_OK) {
        fprintf(stderr, "run: %s\n", hri_last_error_message());
        return 1;
    }
    HriOutcome outcome;
    uint64_t steps = 0;
    HriStep last;
    size_t len = hri_episode_len(ep);
    if (hri_episode_outcome(ep, &outcome) != HRI_STATUS_OK ||
        hri_episode_steps_to_robot_goal(ep, &steps) != HRI_STATUS_OK ||
        hri_episode_step(ep, len - 1, &last) != HRI_STATUS_OK) {
        return 1;
    }
    double robot[2], human[2];
    if (hri_episode_positions(ep, 0, robot, human, 2) != HRI_STATUS_OK) {
        return 1;
    }
    printf("outcome=%d len=%zu steps=%llu p_aware=%.6f start=%.1f,%.1f\n", (int)outcome, len,
           (unsigned long long)steps, last.p_aware, human[0], human[1]);
    hri_episode_free(ep);
    hri_scenario_free(sc);
    return 0;
}
