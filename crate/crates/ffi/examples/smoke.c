/* Runs the ten-neuron ramp preset and prints the spike count. */
#include <stdio.h>
#include "neuroadc.h"

static int check(NadcStatus s, const char *what) {
    if (s != NADC_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, nadc_last_error());
        return 1;
    }
    return 0;
}

int main(void) {
    NadcConfig *cfg = NULL;
    NadcTrace *trace = NULL;
    size_t count = 0;
    NadcSpike first;

    if (check(nadc_config_from_preset("paper-ramp-10", &cfg), "preset")) return 1;
    if (check(nadc_config_set_seed(cfg, 7), "seed")) return 1;
    if (check(nadc_run(cfg, &trace), "run")) return 1;
    if (check(nadc_trace_spike_count(trace, &count), "count")) return 1;
    if (count == 0 || check(nadc_trace_spike(trace, 0, &first), "spike")) return 1;
    printf("spikes=%zu first_step=%llu first_id=%zu\n", count, (unsigned long long)first.step, first.id);

    nadc_trace_free(trace);
    nadc_config_free(cfg);
    return 0;
}
